#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "compsrt/packed.hpp"
#include "compsrt/quant.hpp"
#include "compsrt/tensor.hpp"
#include "helpers.hpp"

using namespace csrt;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result csrt_run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 1") {
    CHECK(csrt_run({}).code == cli::kExitUsage);
    CHECK(csrt_run({"nonsense"}).code == cli::kExitUsage);
    CHECK(csrt_run({"hadamard", "--out", "x"}).code == cli::kExitUsage);
    CHECK(csrt_run({"report"}).code == cli::kExitUsage);
    CHECK(csrt_run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("hadamard round trip through files") {
    testing::TempDir dir("cli_had");
    std::mt19937_64 gen(1);
    const Tensor x = testing::random_tensor({3, 5}, gen);
    save_tensor(x, dir / "x.csrt");
    const auto fwd = csrt_run({"hadamard", "--in", (dir / "x.csrt").string(), "--out", (dir / "h.csrt").string()});
    REQUIRE(fwd.code == 0);
    CHECK(fwd.out.find("original_dim=5 padded_dim=8") != std::string::npos);
    CHECK(fwd.err.find("csrt hadamard:") != std::string::npos);
    CHECK(load_tensor(dir / "h.csrt").shape() == Shape{3, 8});

    CHECK(csrt_run({"hadamard", "--in", (dir / "h.csrt").string(), "--out", (dir / "y.csrt").string(), "--inverse"})
              .code == cli::kExitUsage);
    REQUIRE(csrt_run({"hadamard", "--in", (dir / "h.csrt").string(), "--out", (dir / "y.csrt").string(), "--inverse",
                      "--padinfo", "5"})
                .code == 0);
    const Tensor y = load_tensor(dir / "y.csrt");
    REQUIRE(y.shape() == x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(std::abs(y[i] - x[i]) < 1e-6);

    CHECK(csrt_run({"hadamard", "--in", (dir / "missing.csrt").string(), "--out", (dir / "z.csrt").string()}).code ==
          cli::kExitData);
}

TEST_CASE("quantize, report, dequantize") {
    testing::TempDir dir("cli_quant");
    std::mt19937_64 gen(2);
    const Tensor w = testing::random_tensor({10, 20}, gen);
    save_tensor(w, dir / "w.csrt");
    const auto q = csrt_run({"quantize", "--in", (dir / "w.csrt").string(), "--out", (dir / "w.csrq").string(),
                             "--bits", "4", "--prune", "0.4"});
    REQUIRE(q.code == 0);
    CHECK(q.out.find("bits_per_param=3.4 ") != std::string::npos);

    const auto rep = csrt_run({"report", "--in", (dir / "w.csrq").string(), "--csv"});
    REQUIRE(rep.code == 0);
    CHECK(rep.out.find(",3.4\n") != std::string::npos);

    REQUIRE(csrt_run({"quantize", "--in", (dir / "w.csrt").string(), "--out", (dir / "p.csrq").string(), "--bits", "3"})
                .code == 0);
    REQUIRE(csrt_run({"dequantize", "--in", (dir / "p.csrq").string(), "--out", (dir / "p.csrt").string()}).code == 0);
    const PackedTensor pt = load_packed(dir / "p.csrq");
    CHECK(load_tensor(dir / "p.csrt") == fake_quantize(w, pt.params));

    const auto both = csrt_run({"report", "--in", (dir / "w.csrq").string(), (dir / "p.csrq").string()});
    REQUIRE(both.code == 0);
    CHECK(both.out.find("total:") != std::string::npos);

    CHECK(csrt_run({"quantize", "--in", (dir / "w.csrt").string(), "--out", (dir / "x.csrq").string(), "--bits", "9"})
              .code == cli::kExitUsage);
    auto bytes = read_file_bytes(dir / "w.csrq");
    bytes.resize(bytes.size() - 3);
    write_file_bytes(bytes, dir / "bad.csrq");
    CHECK(csrt_run({"dequantize", "--in", (dir / "bad.csrq").string(), "--out", (dir / "o.csrt").string()}).code ==
          cli::kExitData);
    CHECK(csrt_run({"report", "--in", (dir / "bad.csrq").string()}).code == cli::kExitData);
}

TEST_CASE("prune writes a mask") {
    testing::TempDir dir("cli_prune");
    save_tensor(Tensor({2, 3}, {1, -5, 2, 0.5f, 4, -3}), dir / "w.csrt");
    const auto r = csrt_run({"prune", "--in", (dir / "w.csrt").string(), "--out", (dir / "p.csrt").string(),
                             "--fraction", "0.5", "--mask", (dir / "m.bin").string()});
    REQUIRE(r.code == 0);
    const Tensor p = load_tensor(dir / "p.csrt");
    CHECK(p[0] == 0.0f);
    CHECK(p[1] == -5.0f);
    CHECK(std::filesystem::exists(dir / "m.bin"));
    CHECK(csrt_run({"prune", "--in", (dir / "w.csrt").string(), "--out", (dir / "p.csrt").string(), "--fraction",
                    "1.5"})
              .code == cli::kExitUsage);
}

TEST_CASE("synth and analyze") {
    testing::TempDir dir("cli_an");
    REQUIRE(csrt_run({"synth", "--dir", dir.path().string(), "--count", "12", "--seed", "3"}).code == 0);
    const auto manifest = (dir / "manifest.tsv").string();
    const auto a = csrt_run({"analyze", "--pairs", manifest, "--sample", "2000"});
    REQUIRE(a.code == 0);
    CHECK(a.out.rfind("test,name,N,statistic,p_value,d_z\n", 0) == 0);
    CHECK(count_lines(a.out) == 4);
    CHECK(a.out.find("delta_r,R_pre-R_post,12,") != std::string::npos);

    const auto s = csrt_run({"analyze", "--pairs", manifest, "--eps-sweep", "--sample", "500", "--out",
                             (dir / "sweep.csv").string()});
    REQUIRE(s.code == 0);
    CHECK(count_lines(slurp(dir / "sweep.csv")) == 1 + 3 * 11);

    {
        std::ofstream f(dir / "empty.tsv");
    }
    CHECK(csrt_run({"analyze", "--pairs", (dir / "empty.tsv").string()}).code == cli::kExitUsage);
    CHECK(csrt_run({"analyze", "--pairs", (dir / "nothere.tsv").string()}).code == cli::kExitData);
}

TEST_CASE("toy-eval is deterministic") {
    testing::TempDir dir("cli_toy");
    const std::vector<std::string> args{"toy-eval", "--bits", "4", "--seeds", "2", "--seed", "5"};
    auto with_out = [&](const std::string& name) {
        auto v = args;
        v.push_back("--out");
        v.push_back((dir / name).string());
        return v;
    };
    REQUIRE(csrt_run(with_out("a.csv")).code == 0);
    REQUIRE(csrt_run(with_out("b.csv")).code == 0);
    const auto csv = slurp(dir / "a.csv");
    CHECK(csv == slurp(dir / "b.csv"));
    CHECK(csv.rfind("hadamard,tune,bits,prune,seed,output_mse,output_psnr,bits_per_param\n", 0) == 0);
    CHECK(count_lines(csv) == 1 + 2 + 1);
    CHECK(csrt_run({"toy-eval", "--tune", "sideways", "--finetune", "--seeds", "1"}).code == cli::kExitUsage);
    CHECK(csrt_run({"toy-eval", "--hadamard", "both", "--seeds", "1"}).code == cli::kExitUsage);
}

TEST_CASE("finetune with a config file and history") {
    testing::TempDir dir("cli_ft");
    std::mt19937_64 gen(4);
    save_tensor(testing::random_tensor({6, 10}, gen), dir / "w.csrt");
    save_tensor(testing::random_tensor({8, 10}, gen, -2, 2), dir / "x0.csrt");
    save_tensor(testing::random_tensor({8, 10}, gen, -2, 2), dir / "x1.csrt");
    {
        std::ofstream f(dir / "ft.cfg");
        f << "# optimiser\nlr = 0.02\nmax_iters=25\ntune=ab\n";
    }
    const auto r = csrt_run({"finetune", "--weight", (dir / "w.csrt").string(), "--calib", (dir / "x0.csrt").string(),
                             "--calib", (dir / "x1.csrt").string(), "--hadamard", "--config",
                             (dir / "ft.cfg").string(), "--history", (dir / "h.csv").string(), "--out",
                             (dir / "w.csrq").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("iterations=25") != std::string::npos);
    const auto hist = slurp(dir / "h.csv");
    CHECK(hist.rfind("iter,loss\n", 0) == 0);
    CHECK(count_lines(hist) == 27);
    CHECK(load_packed(dir / "w.csrq").hadamard_applied);

    // flags override the file
    const auto o = csrt_run({"finetune", "--weight", (dir / "w.csrt").string(), "--calib", (dir / "x0.csrt").string(),
                             "--config", (dir / "ft.cfg").string(), "--iters", "3"});
    REQUIRE(o.code == 0);
    CHECK(o.out.find("iterations=3") != std::string::npos);

    {
        std::ofstream f(dir / "bad.cfg");
        f << "momentum=0.5\n";
    }
    CHECK(csrt_run({"finetune", "--weight", (dir / "w.csrt").string(), "--calib", (dir / "x0.csrt").string(),
                    "--config", (dir / "bad.cfg").string()})
              .code == cli::kExitUsage);
}

TEST_CASE("metrics command") {
    testing::TempDir dir("cli_met");
    save_tensor(Tensor({4, 4}, std::vector<float>(16, 0.5f)), dir / "a.csrt");
    save_tensor(Tensor({4, 4}, std::vector<float>(16, 0.0f)), dir / "b.csrt");
    // SSIM needs 11x11; the 4x4 image is a usage error after PSNR inputs are read
    CHECK(csrt_run({"metrics", "--a", (dir / "a.csrt").string(), "--b", (dir / "b.csrt").string()}).code ==
          cli::kExitUsage);
    save_tensor(Tensor({12, 12}, std::vector<float>(144, 0.5f)), dir / "c.csrt");
    save_tensor(Tensor({12, 12}, std::vector<float>(144, 0.0f)), dir / "d.csrt");
    const auto r = csrt_run({"metrics", "--a", (dir / "c.csrt").string(), "--b", (dir / "d.csrt").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("psnr=6.020599913") != std::string::npos);
}

}  // TEST_SUITE
