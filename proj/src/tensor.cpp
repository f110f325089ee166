#include "compsrt/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <string>

#include "compsrt/byteio.hpp"
#include "compsrt/errors.hpp"

namespace csrt {

namespace {

constexpr std::string_view kTensorMagic = "CSRT";
constexpr std::uint8_t kTensorVersion = 1;
constexpr std::uint8_t kDtypeF32 = 0;

std::string shape_str(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) {
        if (d != 0 && n > std::numeric_limits<std::size_t>::max() / d)
            throw ArgumentError("shape " + shape_str(shape) + " overflows size_t");
        n *= d;
    }
    return n;
}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_.empty()) throw ArgumentError("Tensor: shape must have at least one dimension");
    if (std::find(shape_.begin(), shape_.end(), 0u) != shape_.end())
        throw ArgumentError("Tensor: zero dimension in shape " + shape_str(shape_));
    if (shape_numel(shape_) != data_.size())
        throw ArgumentError("Tensor: shape " + shape_str(shape_) + " does not match " +
                            std::to_string(data_.size()) + " elements");
}

Tensor Tensor::zeros(Shape shape) {
    const std::size_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<float>(n, 0.0f));
}

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) return false;
    for (std::size_t i = 0; i < a.numel(); ++i)
        if (std::bit_cast<std::uint32_t>(a[i]) != std::bit_cast<std::uint32_t>(b[i])) return false;
    return true;
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
    if (t.ndim() > 255) throw ArgumentError("encode_tensor: ndim exceeds 255");
    detail::ByteWriter w;
    w.raw(kTensorMagic);
    w.u8(kTensorVersion);
    w.u8(kDtypeF32);
    w.u8(static_cast<std::uint8_t>(t.ndim()));
    for (auto d : t.shape()) w.u64(d);
    for (float v : t.values()) w.f32(v);
    return w.take();
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes, "CSRT");
    r.expect_magic(kTensorMagic);
    if (auto v = r.u8(); v != kTensorVersion)
        throw FormatError("CSRT: unsupported version " + std::to_string(v));
    if (auto dt = r.u8(); dt != kDtypeF32) throw FormatError("CSRT: unsupported dtype " + std::to_string(dt));
    const std::uint8_t ndim = r.u8();
    if (ndim == 0) throw FormatError("CSRT: ndim must be >= 1");
    Shape shape(ndim);
    for (auto& d : shape) {
        d = r.u64();
        if (d == 0) throw FormatError("CSRT: zero dimension");
    }
    std::size_t numel = 0;
    try {
        numel = shape_numel(shape);
    } catch (const ArgumentError&) {
        throw FormatError("CSRT: dimensions overflow");
    }
    if (numel > r.remaining() / 4 || r.remaining() != numel * 4)
        throw FormatError("CSRT: payload holds " + std::to_string(r.remaining()) + " bytes, expected " +
                          std::to_string(numel) + " f32 values");
    std::vector<float> data(numel);
    for (auto& v : data) {
        v = r.f32();
        if (!std::isfinite(v)) throw ValidationError("CSRT: non-finite value in payload");
    }
    return Tensor(std::move(shape), std::move(data));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return bytes;
}

void write_file_bytes(std::span<const std::uint8_t> bytes, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

Tensor load_tensor(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return decode_tensor(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void save_tensor(const Tensor& t, const std::filesystem::path& path) { write_file_bytes(encode_tensor(t), path); }

std::vector<float> sample_elements(const Tensor& t, std::size_t k, Seed seed) {
    if (k == 0) throw ArgumentError("sample_elements: k must be >= 1");
    const std::size_t n = t.numel();
    if (k >= n) return t.data();

    std::vector<std::size_t> index(n);
    std::iota(index.begin(), index.end(), std::size_t{0});
    Rng rng(seed);
    std::vector<float> out(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(index[i], index[j]);
        out[i] = t[index[i]];
    }
    return out;
}

Tensor student_t_tensor(Shape shape, int df, double scale, Rng& rng) {
    std::vector<float> data(shape_numel(shape));
    for (auto& v : data) v = static_cast<float>(scale * rng.student_t(df));
    return Tensor(std::move(shape), std::move(data));
}

Tensor normal_tensor(Shape shape, double stddev, Rng& rng) {
    std::vector<float> data(shape_numel(shape));
    for (auto& v : data) v = static_cast<float>(stddev * rng.normal());
    return Tensor(std::move(shape), std::move(data));
}

}  // namespace csrt
