#include <doctest.h>

#include "tlbee/partition.hpp"

using namespace tlbee;

TEST_SUITE_BEGIN("partition");

TEST_CASE("enumeration counts match the partition function") {
  // p(k) for k = 0..10 with unlimited parts
  const int p[] = {1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42};
  for (int k = 0; k <= 10; ++k)
    CHECK(partitions_of(k, k == 0 ? 1 : k).size() == static_cast<std::size_t>(p[k]));
}

TEST_CASE("part-count restriction") {
  CHECK(partitions_of(5, 1).size() == 1);   // (5)
  CHECK(partitions_of(5, 2).size() == 3);   // (5), (4,1), (3,2)
  CHECK(partitions_of(6, 3).size() == 7);
}

TEST_CASE("reverse-lexicographic order") {
  const auto ps = partitions_of(4, 4);
  REQUIRE(ps.size() == 5);
  CHECK(ps.front().parts() == std::vector<int>{4});
  CHECK(ps.back().parts() == std::vector<int>{1, 1, 1, 1});
}

TEST_CASE("conjugate") {
  const Partition p({4, 2, 1});
  CHECK(p.conjugate().parts() == std::vector<int>{3, 2, 1, 1});
  CHECK(p.conjugate().conjugate() == p);
  CHECK(Partition().conjugate().empty());
}

TEST_CASE("invalid partitions rejected") {
  CHECK_THROWS(Partition({1, 2}));
  CHECK_THROWS(Partition({2, 0}));
}

TEST_CASE("hash distinguishes partitions and variable counts") {
  const Partition a({2, 1}), b({3});
  CHECK(partition_hash(a, 3) != partition_hash(b, 3));
  CHECK(partition_hash(a, 3) != partition_hash(a, 4));
}

TEST_SUITE_END();
