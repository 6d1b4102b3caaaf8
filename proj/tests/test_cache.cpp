#include <cstdio>
#include <fstream>

#include <doctest.h>

#include "mmcache/cache.hpp"

using namespace mmcache;
using namespace mmcache::cache;

namespace {

catalog::Content item(std::int64_t id, std::int64_t size) {
  catalog::Content c;
  c.id = id;
  c.modality_class = catalog::ModalityClass::audio_mp3;
  c.modality = catalog::Modality::audio;
  c.size_bytes = size;
  c.qos = catalog::qos_profile(c.modality_class);
  return c;
}

bool same_entries(const CacheState& a, const CacheState& b) {
  if (a.used_bytes() != b.used_bytes()) return false;
  if (a.entries().size() != b.entries().size()) return false;
  for (const auto& [id, e] : a.entries()) {
    const auto it = b.entries().find(id);
    if (it == b.entries().end()) return false;
    if (it->second.size_bytes != e.size_bytes || it->second.importance != e.importance ||
        it->second.last_access != e.last_access || it->second.inserted_at != e.inserted_at)
      return false;
  }
  return true;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE("cache") {
  TEST_CASE("importance admission evicts the least important prefix") {
    CacheState c(100);
    CHECK(c.on_content_arrival(item(1, 40), 1.0, 0).cached);  // A
    CHECK(c.on_content_arrival(item(2, 40), 3.0, 1).cached);  // B
    CHECK(c.on_content_arrival(item(3, 20), 9.0, 2).cached);  // C
    CHECK(c.free_bytes() == 0);

    const CacheDecision d = c.on_content_arrival(item(4, 70), 5.0, 3);
    CHECK(d.cached);
    CHECK(d.evicted == std::vector<std::int64_t>{1, 2});  // ascending importance
    CHECK(c.contains(3));
    CHECK(c.contains(4));
    CHECK(c.used_bytes() == 90);
  }

  TEST_CASE("an arrival that cannot free enough space leaves the cache untouched") {
    CacheState c(100);
    (void)c.on_content_arrival(item(1, 40), 1.0, 0);
    (void)c.on_content_arrival(item(2, 40), 3.0, 1);
    (void)c.on_content_arrival(item(3, 20), 9.0, 2);
    CacheState before(100);
    (void)before.on_content_arrival(item(1, 40), 1.0, 0);
    (void)before.on_content_arrival(item(2, 40), 3.0, 1);
    (void)before.on_content_arrival(item(3, 20), 9.0, 2);

    // only A (importance 1) scores below 2.0; evicting it frees 40 < 70
    const CacheDecision d = c.on_content_arrival(item(4, 70), 2.0, 3);
    CHECK_FALSE(d.cached);
    CHECK(d.evicted.empty());
    CHECK(same_entries(c, before));
  }

  TEST_CASE("ties in importance evict the stalest entry first") {
    CacheState c(100);
    (void)c.on_content_arrival(item(1, 50), 2.0, 0);
    (void)c.on_content_arrival(item(2, 50), 2.0, 5);
    (void)c.lookup(1, 9);  // now 1 is fresher than 2

    const CacheDecision d = c.on_content_arrival(item(3, 50), 4.0, 10);
    CHECK(d.cached);
    CHECK(d.evicted == std::vector<std::int64_t>{2});
  }

  TEST_CASE("re-arrival refreshes importance and recency without eviction") {
    CacheState c(100);
    (void)c.on_content_arrival(item(1, 60), 1.0, 0);
    const CacheDecision d = c.on_content_arrival(item(1, 60), 8.0, 7);
    CHECK(d.cached);
    CHECK(d.evicted.empty());
    CHECK(c.entries().at(1).importance == 8.0);
    CHECK(c.entries().at(1).last_access == 7);
    CHECK(c.used_bytes() == 60);
  }

  TEST_CASE("items larger than the whole cache are rejected outright") {
    CacheState c(100);
    const CacheDecision d = c.on_content_arrival(item(1, 101), 99.0, 0);
    CHECK_FALSE(d.cached);
    CHECK(c.used_bytes() == 0);
    CHECK(c.on_content_arrival(item(2, 100), 0.0, 1).cached);  // exact fit
  }

  TEST_CASE("equal importance never justifies an eviction") {
    CacheState c(100);
    (void)c.on_content_arrival(item(1, 100), 5.0, 0);
    const CacheDecision d = c.on_content_arrival(item(2, 50), 5.0, 1);
    CHECK_FALSE(d.cached);  // candidates must score strictly below the arrival
    CHECK(c.contains(1));
  }

  TEST_CASE("eviction planning is a pure preview") {
    CacheState c(100);
    (void)c.on_content_arrival(item(1, 40), 1.0, 0);
    (void)c.on_content_arrival(item(2, 40), 3.0, 1);
    const auto plan = c.plan_evictions(50, 2.0);
    CHECK(plan == std::vector<std::int64_t>{1});  // cut at importance 3 >= 2
    CHECK(c.contains(1));
    CHECK(c.contains(2));
    CHECK(c.plan_evictions(50, 9.0) == std::vector<std::int64_t>{1, 2});
  }

  TEST_CASE("lookup reports and bumps hits only") {
    CacheState c(100);
    (void)c.on_content_arrival(item(1, 40), 1.0, 0);
    CHECK(c.lookup(1, 5));
    CHECK(c.entries().at(1).last_access == 5);
    CHECK_FALSE(c.lookup(2, 6));
    CHECK_FALSE(c.contains(2));
  }

  TEST_CASE("recency admission always makes room") {
    CacheState c(100);
    (void)c.lru_admit(item(1, 40), 0);
    (void)c.lru_admit(item(2, 40), 1);
    (void)c.lookup(1, 2);  // 2 becomes the LRU entry

    const CacheDecision d = c.lru_admit(item(3, 60), 3);
    CHECK(d.cached);
    CHECK(d.evicted == std::vector<std::int64_t>{2});
    CHECK(c.contains(1));
    CHECK(c.contains(3));

    const CacheDecision big = c.lru_admit(item(4, 101), 4);
    CHECK_FALSE(big.cached);  // can never fit
    const CacheDecision flush = c.lru_admit(item(5, 100), 5);
    CHECK(flush.cached);
    CHECK(flush.evicted.size() == 2);
    CHECK(c.used_bytes() == 100);
  }

  TEST_CASE("windowed-popularity admission compares against the mean") {
    importance::RequestWindow w(60);
    for (int i = 0; i < 5; ++i) w.record(0, 100);
    w.record(0, 200);
    // mean count per content is 3: admit x (5 >= 3), refuse y (1 < 3)
    CHECK(dpwcs_admit(w, 100));
    CHECK_FALSE(dpwcs_admit(w, 200));
    CHECK_FALSE(dpwcs_admit(w, 300));  // unseen content

    importance::RequestWindow empty(60);
    CHECK(dpwcs_admit(empty, 1));  // a cold window admits everything
  }

  TEST_CASE("binary-agent state is a one-hot over the launch catalog") {
    const drl::Vec s = encode_cpdqn_state(3, 5, 0.5, 0.25);
    REQUIRE(s.size() == 7);
    CHECK(s == drl::Vec{0, 0, 1, 0, 0, 0.5, 0.25});

    const drl::Vec released = encode_cpdqn_state(9, 5, 2.0, -1.0);
    CHECK(released == drl::Vec{0, 0, 0, 0, 0, 1.0, 0.0});  // unknown id, clamped tails
    CHECK(kCpdqnSkip == 0);
    CHECK(kCpdqnAdmit == 1);
  }

  TEST_CASE("cache dump is sorted by node then content") {
    CacheState a(100), b(100);
    (void)a.on_content_arrival(item(5, 10), 1.5, 2);
    (void)b.on_content_arrival(item(1, 20), 2.5, 3);
    (void)b.on_content_arrival(item(4, 30), 0.5, 4);
    const std::string path = "test_cache_dump.csv";
    write_cache_csv({{1, &b}, {0, &a}}, path);
    CHECK(slurp(path) ==
          "node_id,content_id,size_bytes,importance,last_access\n"
          "0,5,10,1.5,2\n"
          "1,1,20,2.5,3\n"
          "1,4,30,0.5,4\n");
    std::remove(path.c_str());
  }
}
