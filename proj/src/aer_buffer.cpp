#include "clutterpush/aer_buffer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "clutterpush/error.hpp"
#include "clutterpush/kernels.hpp"
#include "clutterpush/rng.hpp"

namespace cpush {

namespace {

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Little-endian byte writer/reader independent of host order.
struct Writer {
    std::vector<unsigned char> bytes;
    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
};

struct Reader {
    const std::vector<unsigned char>& bytes;
    std::size_t pos{0};
    void need(std::size_t n) const {
        if (pos + n > bytes.size()) throw Error(ErrorCode::io_failure, "snapshot truncated");
    }
    std::uint8_t u8() {
        need(1);
        return bytes[pos++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[pos++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
};

} // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw Error(ErrorCode::invalid_argument, "replay capacity must be positive");
}

void ReplayBuffer::push(const Transition& t) {
    if (!all_finite(t.obs) || !all_finite(t.next_obs) || !all_finite(t.action) || !std::isfinite(t.reward))
        throw Error(ErrorCode::invalid_argument, "transition has non-finite fields");
    if (entries_.size() < capacity_)
        entries_.push_back(t);
    else
        entries_[write_index_] = t;
    write_index_ = (write_index_ + 1) % capacity_;
}

std::vector<Transition> ReplayBuffer::chronological() const {
    if (entries_.size() < capacity_) return entries_;
    std::vector<Transition> out;
    out.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) out.push_back(entries_[(write_index_ + i) % capacity_]);
    return out;
}

void ReplayBuffer::save(const std::filesystem::path& path) const {
    namespace sf = snapshot_format;
    Writer w;
    for (char c : sf::kMagic) w.u8(static_cast<std::uint8_t>(c));
    w.u32(sf::kVersion);
    w.u32(obs_layout::kSize);
    w.u32(3);
    w.u32(sf::kRecordBytes);
    w.u64(capacity_);
    w.u64(entries_.size());
    w.u64(write_index_);
    for (const Transition& t : entries_) {
        for (double v : t.obs) w.f64(v);
        for (double v : t.action) w.f64(v);
        w.f64(t.reward);
        for (double v : t.next_obs) w.f64(v);
        w.u8(t.done ? 1 : 0);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(w.bytes.data()), static_cast<std::streamsize>(w.bytes.size()));
    if (!out) throw Error(ErrorCode::io_failure, "write failed for " + path.string());
}

ReplayBuffer ReplayBuffer::load(const std::filesystem::path& path) {
    namespace sf = snapshot_format;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r{bytes};
    for (char c : sf::kMagic) {
        if (r.u8() != static_cast<std::uint8_t>(c)) throw Error(ErrorCode::io_failure, "not a replay snapshot");
    }
    if (r.u32() != sf::kVersion) throw Error(ErrorCode::io_failure, "unsupported snapshot version");
    if (r.u32() != obs_layout::kSize || r.u32() != 3 || r.u32() != sf::kRecordBytes)
        throw Error(ErrorCode::io_failure, "snapshot record layout mismatch");
    const std::uint64_t capacity = r.u64();
    const std::uint64_t count = r.u64();
    const std::uint64_t write_index = r.u64();
    if (capacity == 0 || count > capacity || write_index >= capacity || (count < capacity && write_index != count))
        throw Error(ErrorCode::io_failure, "inconsistent snapshot header");
    r.need(count * sf::kRecordBytes);
    ReplayBuffer buf(capacity);
    buf.entries_.resize(count);
    for (Transition& t : buf.entries_) {
        for (double& v : t.obs) v = r.f64();
        for (double& v : t.action) v = r.f64();
        t.reward = r.f64();
        for (double& v : t.next_obs) v = r.f64();
        t.done = r.u8() != 0;
    }
    if (r.pos != bytes.size()) throw Error(ErrorCode::io_failure, "trailing bytes in snapshot");
    buf.write_index_ = write_index;
    return buf;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::length_mismatch, "vectors differ in length");
    double out = 0;
    kernels::serial::cosine_rows(a, a.size(), b, {}, std::span<double>(&out, 1));
    return out;
}

std::vector<std::size_t> uniform_presample(std::size_t n, std::size_t m, std::uint64_t seed) {
    if (m > n) throw Error(ErrorCode::invalid_argument, "cannot draw more indices than exist");
    Rng rng(seed);
    std::unordered_set<std::size_t> chosen;
    chosen.reserve(m * 2);
    // Floyd's algorithm: one draw per selected element.
    for (std::size_t j = n - m; j < n; ++j) {
        const auto t = static_cast<std::size_t>(rng.below(j + 1));
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<std::size_t> out(chosen.begin(), chosen.end());
    std::sort(out.begin(), out.end());
    return out;
}

AerBatch sample_aer(const ReplayBuffer& buffer, std::span<const double> current, const AerParams& params,
                    std::uint64_t seed) {
    if (params.bs < 1 || params.k < 1) throw Error(ErrorCode::invalid_argument, "bs and k must be >= 1");
    if (current.size() != static_cast<std::size_t>(obs_layout::kSize))
        throw Error(ErrorCode::length_mismatch, "current state must have 49 values");
    if (!params.mask.empty() && params.mask.size() != current.size())
        throw Error(ErrorCode::length_mismatch, "mask length differs from the state");
    const auto bs = static_cast<std::size_t>(params.bs);
    if (buffer.size() < bs)
        throw Error(ErrorCode::insufficient_entries,
                    "buffer holds " + std::to_string(buffer.size()) + " entries, batch needs " + std::to_string(bs));

    AerBatch batch;
    const std::size_t m = std::min(bs * static_cast<std::size_t>(params.k), buffer.size());
    batch.presample = uniform_presample(buffer.size(), m, seed);

    const std::size_t dim = current.size();
    std::vector<double> rows(m * dim);
    for (std::size_t i = 0; i < m; ++i) {
        const Observation& o = buffer.at(batch.presample[i]).obs;
        std::copy(o.begin(), o.end(), rows.begin() + static_cast<std::ptrdiff_t>(i * dim));
    }
    std::vector<double> sim(m);
    kernels::omp::cosine_rows(rows, dim, current, params.mask, sim);

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // presample is ascending, so position order equals slot order for ties.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sim[a] > sim[b]; });
    order.resize(bs);
    for (std::size_t i : order) {
        batch.selected.push_back(batch.presample[i]);
        batch.similarity.push_back(sim[i]);
    }
    return batch;
}

} // namespace cpush
