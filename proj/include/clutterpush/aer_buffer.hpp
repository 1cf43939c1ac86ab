#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "clutterpush/env.hpp"

namespace cpush {

struct Transition {
    Observation obs{};
    std::array<double, 3> action{};
    double reward{0};
    Observation next_obs{};
    bool done{false};
    friend bool operator==(const Transition&, const Transition&) = default;
};

namespace aer_defaults {
inline constexpr std::size_t kCapacity = 1'000'000;
inline constexpr int kBatchSize = 512;
inline constexpr int kOversample = 4;
} // namespace aer_defaults

// FIFO ring. Storage grows on demand up to the capacity, so a default
// buffer does not allocate a million records up front.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = aer_defaults::kCapacity);

    // Throws Error(invalid_argument) for non-finite fields.
    void push(const Transition& t);

    [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    // Slot the next push writes to.
    [[nodiscard]] std::size_t write_index() const noexcept { return write_index_; }
    // Storage slot i in [0, size()).
    [[nodiscard]] const Transition& at(std::size_t i) const { return entries_.at(i); }
    // Oldest-first view of the contents.
    [[nodiscard]] std::vector<Transition> chronological() const;

    void save(const std::filesystem::path& path) const;
    static ReplayBuffer load(const std::filesystem::path& path);

private:
    std::size_t capacity_;
    std::size_t write_index_{0};
    std::vector<Transition> entries_;
};

// a.b / (|a||b|); 0 if either norm is 0. Throws Error(length_mismatch).
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// m distinct indices drawn uniformly from [0, n) (Floyd), ascending.
std::vector<std::size_t> uniform_presample(std::size_t n, std::size_t m, std::uint64_t seed);

struct AerBatch {
    std::vector<std::size_t> presample;  // ascending storage slots
    std::vector<std::size_t> selected;   // best first
    std::vector<double> similarity;      // of `selected`
};

struct AerParams {
    int bs{aer_defaults::kBatchSize};
    int k{aer_defaults::kOversample};
    std::vector<std::uint8_t> mask;  // optional per-dimension mask; empty = all 49
};

// Pre-samples min(k*bs, size) slots uniformly without replacement, ranks them
// by cosine similarity of the stored obs to `current`, and keeps the top bs
// (ties by slot ascending). Throws Error(insufficient_entries) when
// size < bs, Error(invalid_argument) for bs < 1 or k < 1.
AerBatch sample_aer(const ReplayBuffer& buffer, std::span<const double> current, const AerParams& params,
                    std::uint64_t seed);

// Snapshot layout (little-endian):
//   magic "CPRBUF01" | u32 version | u32 obs_dim | u32 action_dim | u32 record_bytes
//   u64 capacity | u64 count | u64 write_index
//   count records in slot order: obs f64[49], action f64[3], reward f64,
//   next_obs f64[49], done u8
namespace snapshot_format {
inline constexpr std::array<char, 8> kMagic{'C', 'P', 'R', 'B', 'U', 'F', '0', '1'};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::uint32_t kRecordBytes = (49 + 3 + 1 + 49) * 8 + 1;
} // namespace snapshot_format

} // namespace cpush
