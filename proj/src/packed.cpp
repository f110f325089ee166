#include "compsrt/packed.hpp"

#include <bit>
#include <string>

#include "compsrt/byteio.hpp"
#include "compsrt/errors.hpp"
#include "compsrt/prune.hpp"

namespace csrt {

namespace {

constexpr std::string_view kPackedMagic = "CSRQ";
constexpr std::uint8_t kPackedVersion = 1;

std::size_t packed_bytes(std::size_t count, int width) {
    return (count * static_cast<std::size_t>(width) + 7) / 8;
}

std::size_t popcount_bytes(std::span<const std::uint8_t> bytes) {
    std::size_t n = 0;
    for (auto b : bytes) n += static_cast<std::size_t>(std::popcount(b));
    return n;
}

}  // namespace

std::vector<std::uint8_t> pack_bits(std::span<const Code> values, int width) {
    if (width < 1 || width > 8) throw ArgumentError("pack_bits: width must be in [1,8]");
    std::vector<std::uint8_t> out(packed_bytes(values.size(), width), 0);
    std::size_t bit = 0;
    for (Code v : values) {
        if (v >> width) throw ArgumentError("pack_bits: value " + std::to_string(v) + " exceeds width");
        for (int k = 0; k < width; ++k, ++bit)
            if ((v >> k) & 1u) out[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
    }
    return out;
}

std::vector<Code> unpack_bits(std::span<const std::uint8_t> bytes, std::size_t count, int width) {
    if (width < 1 || width > 8) throw ArgumentError("unpack_bits: width must be in [1,8]");
    if (bytes.size() < packed_bytes(count, width)) throw FormatError("unpack_bits: truncated code stream");
    std::vector<Code> out(count, 0);
    std::size_t bit = 0;
    for (auto& v : out) {
        for (int k = 0; k < width; ++k, ++bit)
            if ((bytes[bit / 8] >> (bit % 8)) & 1u) v = static_cast<Code>(v | (1u << k));
    }
    return out;
}

std::vector<std::uint8_t> pack_mask(const std::vector<bool>& keep) {
    std::vector<std::uint8_t> out((keep.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < keep.size(); ++i)
        if (keep[i]) out[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    return out;
}

std::vector<bool> unpack_mask(std::span<const std::uint8_t> bytes, std::size_t count) {
    if (bytes.size() < (count + 7) / 8) throw FormatError("unpack_mask: truncated mask");
    std::vector<bool> keep(count);
    for (std::size_t i = 0; i < count; ++i) keep[i] = (bytes[i / 8] >> (i % 8)) & 1u;
    return keep;
}

Shape PackedTensor::stored_shape() const {
    Shape s = shape;
    if (pad && !s.empty()) s.back() = pad->padded_dim;
    return s;
}

std::size_t PackedTensor::stored_numel() const { return shape_numel(stored_shape()); }

PackedTensor pack(std::span<const Code> codes, const QuantParams& params, Shape shape, std::optional<PadInfo> pad,
                  const std::optional<std::vector<bool>>& keep) {
    params.validate();
    if (shape.empty()) throw ArgumentError("pack: empty shape");
    PackedTensor pt;
    pt.params = params;
    pt.shape = std::move(shape);
    if (pad) {
        if (pad->original_dim != pt.shape.back() || pad->padded_dim != next_pow2(pad->original_dim))
            throw ArgumentError("pack: PadInfo does not match shape");
    }
    pt.pad = pad;
    pt.hadamard_applied = pad.has_value();

    const std::size_t n = pt.stored_numel();
    if (codes.size() != n)
        throw ArgumentError("pack: " + std::to_string(codes.size()) + " codes for " + std::to_string(n) + " elements");
    if (keep && keep->size() != n) throw ArgumentError("pack: mask length does not match element count");

    std::vector<Code> kept;
    kept.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (codes[i] > params.levels()) throw ArgumentError("pack: code out of range");
        if (!keep || (*keep)[i]) kept.push_back(codes[i]);
    }
    pt.code_count = kept.size();
    pt.codes = pack_bits(kept, params.bits);
    if (keep) pt.mask = pack_mask(*keep);
    return pt;
}

Tensor unpack(const PackedTensor& pt) {
    const std::size_t n = pt.stored_numel();
    const auto codes = unpack_bits(pt.codes, pt.code_count, pt.params.bits);
    std::vector<float> out(n, 0.0f);
    if (pt.mask) {
        const auto keep = unpack_mask(*pt.mask, n);
        std::size_t next = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!keep[i]) continue;
            if (next >= codes.size()) throw FormatError("unpack: mask keeps more elements than codes stored");
            out[i] = dequantize_value(codes[next++], pt.params);
        }
        if (next != codes.size()) throw FormatError("unpack: code count does not match mask");
    } else {
        if (codes.size() != n) throw FormatError("unpack: code count does not match element count");
        for (std::size_t i = 0; i < n; ++i) out[i] = dequantize_value(codes[i], pt.params);
    }
    return Tensor(pt.stored_shape(), std::move(out));
}

Tensor reconstruct(const PackedTensor& pt) {
    Tensor stored = unpack(pt);
    if (!pt.hadamard_applied) return stored;
    return hadamard_inverse(stored, *pt.pad);
}

double bits_per_parameter(const PackedTensor& pt) {
    if (!pt.mask) return static_cast<double>(pt.params.bits);
    const auto total = static_cast<double>(pt.stored_numel());
    // Single rounding: (b * kept + total) / total.
    return (static_cast<double>(pt.params.bits) * static_cast<double>(pt.code_count) + total) / total;
}

std::size_t encoded_size(const PackedTensor& pt) {
    const std::size_t n = pt.stored_numel();
    std::size_t size = 4 + 4 + 8 * pt.shape.size() + 8 + 4 * 8 + 1 + 8;
    if (pt.mask) size += (n + 7) / 8;
    return size + packed_bytes(pt.code_count, pt.params.bits);
}

std::vector<std::uint8_t> encode_packed(const PackedTensor& pt) {
    pt.params.validate();
    if (pt.shape.size() > 255) throw ArgumentError("encode_packed: ndim exceeds 255");
    if (pt.hadamard_applied != pt.pad.has_value())
        throw ArgumentError("encode_packed: hadamard flag and PadInfo disagree");
    detail::ByteWriter w;
    w.raw(kPackedMagic);
    w.u8(kPackedVersion);
    w.u8(static_cast<std::uint8_t>(pt.params.bits));
    w.u8(pt.hadamard_applied ? 1 : 0);
    w.u8(static_cast<std::uint8_t>(pt.shape.size()));
    for (auto d : pt.stored_shape()) w.u64(d);
    w.u64(pt.pad ? pt.pad->original_dim : 0);
    w.f64(pt.params.lower);
    w.f64(pt.params.upper);
    w.f64(pt.params.alpha);
    w.f64(pt.params.beta);
    w.u8(pt.mask ? 1 : 0);
    if (pt.mask) w.bytes(*pt.mask);
    w.u64(pt.code_count);
    w.bytes(pt.codes);
    return w.take();
}

PackedTensor decode_packed(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes, "CSRQ");
    r.expect_magic(kPackedMagic);
    if (auto v = r.u8(); v != kPackedVersion) throw FormatError("CSRQ: unsupported version " + std::to_string(v));

    PackedTensor pt;
    pt.params.bits = r.u8();
    if (pt.params.bits < 2 || pt.params.bits > 8) throw FormatError("CSRQ: bit-width out of range");
    const std::uint8_t flag = r.u8();
    if (flag > 1) throw FormatError("CSRQ: bad hadamard flag");
    pt.hadamard_applied = flag == 1;
    const std::uint8_t ndim = r.u8();
    if (ndim == 0) throw FormatError("CSRQ: ndim must be >= 1");
    Shape stored(ndim);
    for (auto& d : stored) {
        d = r.u64();
        if (d == 0) throw FormatError("CSRQ: zero dimension");
    }
    std::size_t n = 0;
    try {
        n = shape_numel(stored);
    } catch (const ArgumentError&) {
        throw FormatError("CSRQ: dimensions overflow");
    }
    const std::uint64_t pad_original = r.u64();
    pt.shape = stored;
    if (pt.hadamard_applied != (pad_original != 0)) throw FormatError("CSRQ: hadamard flag and pad field disagree");
    if (pad_original != 0) {
        if (pad_original > stored.back() || next_pow2(pad_original) != stored.back())
            throw FormatError("CSRQ: pad original_dim inconsistent with last dimension");
        pt.pad = PadInfo{pad_original, stored.back()};
        pt.shape.back() = pad_original;
    }
    pt.params.lower = r.f64();
    pt.params.upper = r.f64();
    pt.params.alpha = r.f64();
    pt.params.beta = r.f64();
    try {
        pt.params.validate();
    } catch (const ArgumentError& e) {
        throw FormatError(std::string("CSRQ: ") + e.what());
    }

    const std::uint8_t mask_present = r.u8();
    if (mask_present > 1) throw FormatError("CSRQ: bad mask flag");
    std::size_t kept = n;
    if (mask_present) {
        if (n / 8 > r.remaining()) throw FormatError("CSRQ: truncated mask");
        auto m = r.take((n + 7) / 8);
        if (n % 8 != 0 && (m.back() >> (n % 8)) != 0) throw FormatError("CSRQ: nonzero mask padding bits");
        pt.mask = std::vector<std::uint8_t>(m.begin(), m.end());
        kept = popcount_bytes(m);
    }
    pt.code_count = r.u64();
    if (pt.code_count != kept)
        throw FormatError("CSRQ: code_count " + std::to_string(pt.code_count) + " but " + std::to_string(kept) +
                          " stored elements");
    auto codes = r.take(packed_bytes(kept, pt.params.bits));
    const std::size_t used_bits = kept * static_cast<std::size_t>(pt.params.bits);
    if (used_bits % 8 != 0 && (codes.back() >> (used_bits % 8)) != 0)
        throw FormatError("CSRQ: nonzero code padding bits");
    pt.codes.assign(codes.begin(), codes.end());
    r.expect_end();
    for (Code c : unpack_bits(pt.codes, pt.code_count, pt.params.bits))
        if (c > pt.params.levels()) throw ValidationError("CSRQ: code out of range");
    return pt;
}

PackedTensor compress_tensor(const Tensor& x, const CompressOptions& opts) {
    if (opts.bits < 2 || opts.bits > 8) throw ArgumentError("compress_tensor: bits must be in [2,8]");
    if (!(opts.prune_fraction >= 0.0 && opts.prune_fraction <= 1.0))
        throw ArgumentError("compress_tensor: prune fraction must be in [0,1]");
    std::optional<PadInfo> pad;
    Tensor domain = x;
    if (opts.hadamard) {
        auto t = hadamard_transform(x);
        domain = std::move(t.tensor);
        pad = t.pad;
    }
    std::optional<std::vector<bool>> keep;
    std::vector<float> kept(domain.values().begin(), domain.values().end());
    if (opts.prune_fraction > 0.0) {
        auto pr = prune_unstructured(domain, opts.prune_fraction, derive_seed(opts.search.seed, 1));
        kept.clear();
        for (std::size_t i = 0; i < domain.numel(); ++i)
            if (pr.mask.keep[i]) kept.push_back(domain[i]);
        keep = std::move(pr.mask.keep);
    }
    if (kept.empty()) kept.push_back(0.0f);
    const QuantParams params = search_bounds(kept, opts.bits, opts.search);
    return pack(quantize(domain, params), params, x.shape(), pad, keep);
}

PackedTensor load_packed(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return decode_packed(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_packed(const PackedTensor& pt, const std::filesystem::path& path) {
    write_file_bytes(encode_packed(pt), path);
}

}  // namespace csrt
