#ifndef TLBEE_PARTITION_HPP
#define TLBEE_PARTITION_HPP

#include <cstdint>
#include <vector>

namespace tlbee {

/// Ordered integer partition kappa = (k1 >= k2 >= ... >= km >= 1).
/// The empty partition (weight 0) is represented by an empty parts list.
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<int> parts);

  const std::vector<int>& parts() const { return parts_; }
  int weight() const { return weight_; }
  int num_parts() const { return static_cast<int>(parts_.size()); }
  int part(int i) const {
    return i < num_parts() ? parts_[static_cast<std::size_t>(i)] : 0;
  }
  bool empty() const { return parts_.empty(); }

  /// Conjugate partition (column lengths of the Young diagram).
  Partition conjugate() const;

  bool operator==(const Partition& o) const { return parts_ == o.parts_; }

 private:
  std::vector<int> parts_;
  int weight_ = 0;
};

/// All partitions of weight k with at most max_parts parts, in
/// reverse-lexicographic order ((k) first, (1,1,...,1) last when allowed).
std::vector<Partition> partitions_of(int k, int max_parts);

/// Mixing key for a partition together with a variable count, used to
/// memoize Jack-polynomial evaluations.
std::uint64_t partition_hash(const Partition& p, int nvars);

}  // namespace tlbee

#endif  // TLBEE_PARTITION_HPP
