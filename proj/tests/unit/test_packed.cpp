#include <doctest.h>

#include "compsrt/errors.hpp"
#include "compsrt/packed.hpp"
#include "compsrt/prune.hpp"
#include "helpers.hpp"

using namespace csrt;

namespace {

QuantParams qp(int bits, double l = -1.0, double u = 1.0) {
    QuantParams p;
    p.bits = bits;
    p.lower = l;
    p.upper = u;
    return p;
}

PackedTensor random_packed(std::mt19937_64& gen, bool masked, bool padded) {
    const int bits = 2 + static_cast<int>(gen() % 7);
    const std::size_t rows = 1 + gen() % 5;
    const std::size_t cols = 1 + gen() % 20;
    std::optional<PadInfo> pad;
    std::size_t stored_cols = cols;
    if (padded) {
        stored_cols = next_pow2(cols);
        pad = PadInfo{cols, stored_cols};
    }
    const std::size_t n = rows * stored_cols;
    std::vector<Code> codes(n);
    for (auto& c : codes) c = static_cast<Code>(gen() % (1u << bits));
    std::optional<std::vector<bool>> keep;
    if (masked) {
        keep.emplace(n);
        for (std::size_t i = 0; i < n; ++i) (*keep)[i] = gen() % 3 != 0;
    }
    QuantParams p = qp(bits, -static_cast<double>(gen() % 100) / 10 - 0.1, static_cast<double>(gen() % 100) / 10 + 0.1);
    p.alpha = 1e-3 * static_cast<double>(gen() % 5);
    p.beta = -1e-3 * static_cast<double>(gen() % 5);
    return pack(codes, p, {rows, cols}, pad, keep);
}

}  // namespace

TEST_SUITE("packed") {

TEST_CASE("bit packing is LSB-first") {
    const std::vector<Code> v{1, 2, 3, 0};
    const auto b = pack_bits(v, 2);
    REQUIRE(b.size() == 1);
    // 01 | 10 << 2 | 11 << 4 | 00 << 6
    CHECK(b[0] == 0b00111001);
    CHECK(unpack_bits(b, 4, 2) == v);

    const std::vector<Code> w{5, 7, 1};
    const auto b3 = pack_bits(w, 3);
    REQUIRE(b3.size() == 2);
    CHECK(b3[0] == static_cast<std::uint8_t>(5 | (7 << 3) | ((1 & 0x3) << 6)));
    CHECK(b3[1] == 0);
    CHECK(unpack_bits(b3, 3, 3) == w);
    CHECK_THROWS_AS(pack_bits(std::vector<Code>{4}, 2), ArgumentError);
}

TEST_CASE("bit packing round trips for every width") {
    std::mt19937_64 gen(1);
    for (int width = 1; width <= 8; ++width) {
        std::vector<Code> v(1 + gen() % 100);
        for (auto& c : v) c = static_cast<Code>(gen() % (1u << width));
        CHECK(unpack_bits(pack_bits(v, width), v.size(), width) == v);
    }
    std::vector<bool> keep{true, false, true, true, false, false, true, false, true};
    CHECK(unpack_mask(pack_mask(keep), keep.size()) == keep);
    CHECK(pack_mask(keep).size() == 2);
}

TEST_CASE("bits per parameter") {
    std::vector<Code> codes(10, 1);
    std::vector<bool> keep(10, true);
    for (int i = 0; i < 4; ++i) keep[i] = false;
    CHECK(bits_per_parameter(pack(codes, qp(4), {10}, std::nullopt, keep)) == 3.4);
    CHECK(bits_per_parameter(pack(codes, qp(3), {10}, std::nullopt, keep)) == 2.8);
    CHECK(bits_per_parameter(pack(codes, qp(2), {10}, std::nullopt, std::nullopt)) == 2.0);
}

TEST_CASE("unpack places codes at kept positions") {
    const std::vector<Code> codes{0, 1, 2, 3};
    const std::vector<bool> keep{true, false, true, false};
    const auto pt = pack(codes, qp(2), {4}, std::nullopt, keep);
    CHECK(pt.code_count == 2);
    const Tensor t = unpack(pt);
    CHECK(t[0] == -1.0f);
    CHECK(t[1] == 0.0f);
    CHECK(t[2] == dequantize_value(2, qp(2)));
    CHECK(t[3] == 0.0f);
}

TEST_CASE("pack validates inputs") {
    std::vector<Code> codes(8, 0);
    CHECK_THROWS_AS(pack(codes, qp(2), {7}, std::nullopt, std::nullopt), ArgumentError);
    CHECK_THROWS_AS(pack(codes, qp(2), {2, 4}, std::nullopt, std::vector<bool>(7, true)), ArgumentError);
    CHECK_THROWS_AS(pack(codes, qp(2), {2, 3}, PadInfo{4, 4}, std::nullopt), ArgumentError);
    codes[0] = 4;
    CHECK_THROWS_AS(pack(codes, qp(2), {8}, std::nullopt, std::nullopt), ArgumentError);
}

TEST_CASE("CSRQ round trip across variants") {
    std::mt19937_64 gen(77);
    for (int i = 0; i < 100; ++i) {
        const auto pt = random_packed(gen, i % 2 == 0, i % 3 == 0);
        const auto bytes = encode_packed(pt);
        CHECK(bytes.size() == encoded_size(pt));
        const auto back = decode_packed(bytes);
        CHECK(back == pt);
        CHECK(encode_packed(back) == bytes);
    }
}

TEST_CASE("CSRQ without pruning carries no mask section") {
    std::vector<Code> codes(16, 1);
    const auto plain = pack(codes, qp(4), {16}, std::nullopt, std::nullopt);
    const auto masked = pack(codes, qp(4), {16}, std::nullopt, std::vector<bool>(16, true));
    CHECK(encoded_size(masked) == encoded_size(plain) + 2);
    CHECK_FALSE(decode_packed(encode_packed(plain)).mask.has_value());
}

TEST_CASE("CSRQ rejects corruption") {
    std::mt19937_64 gen(5);
    const auto pt = random_packed(gen, true, true);
    const auto good = encode_packed(pt);
    auto bad = good;
    bad[0] = 'Z';
    CHECK_THROWS_AS(decode_packed(bad), FormatError);
    bad = good;
    bad.push_back(0);
    CHECK_THROWS_AS(decode_packed(bad), FormatError);
    for (std::size_t cut = 0; cut < good.size(); cut += 7) {
        std::vector<std::uint8_t> trunc(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(cut));
        CHECK_THROWS_AS(decode_packed(trunc), FormatError);
    }
    bad = good;
    bad[5] = 1;  // bits
    CHECK_THROWS_AS(decode_packed(bad), FormatError);
    bad = good;
    bad[6] = 0;  // clear hadamard flag but keep the pad field
    CHECK_THROWS_AS(decode_packed(bad), FormatError);
}

TEST_CASE("reconstruct inverts the transform") {
    std::mt19937_64 gen(2);
    const Tensor w = testing::random_tensor({6, 12}, gen);
    CompressOptions o;
    o.bits = 8;
    o.hadamard = true;
    const auto pt = compress_tensor(w, o);
    CHECK(pt.hadamard_applied);
    CHECK(pt.stored_shape() == Shape{6, 16});
    const Tensor r = reconstruct(pt);
    REQUIRE(r.shape() == w.shape());
    for (std::size_t i = 0; i < w.numel(); ++i) CHECK(std::abs(r[i] - w[i]) < 0.05);
}

TEST_CASE("compress_tensor with pruning reports 3.4 bits") {
    std::mt19937_64 gen(12);
    const Tensor w = testing::random_tensor({20, 50}, gen);
    CompressOptions o;
    o.bits = 4;
    o.prune_fraction = 0.4;
    const auto pt = compress_tensor(w, o);
    CHECK(pt.code_count == 600);
    CHECK(bits_per_parameter(pt) == 3.4);
    // pruned positions come back as exact zeros
    const Tensor r = reconstruct(pt);
    const auto keep = unpack_mask(*pt.mask, w.numel());
    for (std::size_t i = 0; i < w.numel(); ++i)
        if (!keep[i]) CHECK(r[i] == 0.0f);
}

TEST_CASE("packed files") {
    testing::TempDir dir("packed");
    std::mt19937_64 gen(3);
    const auto pt = random_packed(gen, true, false);
    save_packed(pt, dir / "w.csrq");
    CHECK(load_packed(dir / "w.csrq") == pt);
    CHECK_THROWS_AS(load_packed(dir / "none.csrq"), IoError);
}

}  // TEST_SUITE
