#include "tlbee/partition.hpp"

#include <numeric>
#include <stdexcept>

namespace tlbee {

Partition::Partition(std::vector<int> parts) : parts_(std::move(parts)) {
  int prev = 1 << 30;
  for (int p : parts_) {
    if (p <= 0) throw std::invalid_argument("partition parts must be positive");
    if (p > prev) throw std::invalid_argument("partition parts must be non-increasing");
    prev = p;
  }
  weight_ = std::accumulate(parts_.begin(), parts_.end(), 0);
}

Partition Partition::conjugate() const {
  std::vector<int> cols;
  if (!parts_.empty()) {
    cols.assign(static_cast<std::size_t>(parts_[0]), 0);
    for (int p : parts_) {
      for (int j = 0; j < p; ++j) cols[static_cast<std::size_t>(j)]++;
    }
  }
  return Partition(std::move(cols));
}

namespace {
void enumerate(int remaining, int max_part, int slots, std::vector<int>& cur,
               std::vector<Partition>& out) {
  if (remaining == 0) {
    out.emplace_back(cur);
    return;
  }
  if (slots == 0) return;
  for (int p = std::min(remaining, max_part); p >= 1; --p) {
    // prune: p * slots must cover the remainder
    if (p * slots < remaining) break;
    cur.push_back(p);
    enumerate(remaining - p, p, slots - 1, cur, out);
    cur.pop_back();
  }
}
}  // namespace

std::vector<Partition> partitions_of(int k, int max_parts) {
  if (k < 0) throw std::invalid_argument("partition weight must be >= 0");
  std::vector<Partition> out;
  std::vector<int> cur;
  if (k == 0) {
    out.emplace_back();
    return out;
  }
  enumerate(k, k, max_parts, cur, out);
  return out;
}

std::uint64_t partition_hash(const Partition& p, int nvars) {
  // FNV-1a over parts and the variable count.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  for (int part : p.parts()) mix(static_cast<std::uint64_t>(part));
  mix(0xabcdefull);
  mix(static_cast<std::uint64_t>(nvars));
  return h;
}

}  // namespace tlbee
