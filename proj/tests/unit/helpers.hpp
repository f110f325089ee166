#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "compsrt/rng.hpp"
#include "compsrt/tensor.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("csrt_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

// Uses std::mt19937_64 so test data does not depend on the library RNG.
inline csrt::Tensor random_tensor(csrt::Shape shape, std::mt19937_64& gen, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<float> v(csrt::shape_numel(shape));
    for (auto& x : v) x = static_cast<float>(dist(gen));
    return csrt::Tensor(std::move(shape), std::move(v));
}

}  // namespace testing
