#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include <doctest.h>

#include "mmcache/workload.hpp"

using namespace mmcache;
using namespace mmcache::workload;

namespace {

catalog::Catalog small_catalog(std::int64_t count, std::uint64_t seed = 1) {
  catalog::CatalogSpec spec;
  spec.count = count;
  spec.seed = seed;
  return catalog::build_catalog(spec);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE("workload") {
  TEST_CASE("arrival rate follows the phase table") {
    const WorkloadProfile p;  // 0:2, 120:12, 240:4, 360:10 over 480 slots
    CHECK(arrival_rate(p, 0) == 2.0);
    CHECK(arrival_rate(p, 119) == 2.0);
    CHECK(arrival_rate(p, 120) == 12.0);
    CHECK(arrival_rate(p, 239) == 12.0);
    CHECK(arrival_rate(p, 240) == 4.0);
    CHECK(arrival_rate(p, 359) == 4.0);
    CHECK(arrival_rate(p, 360) == 10.0);
    CHECK(arrival_rate(p, 479) == 10.0);
    CHECK_THROWS(arrival_rate(p, -1));
    CHECK_THROWS(arrival_rate(p, 480));

    WorkloadProfile bad;
    bad.phases = {{10, 2.0}};
    CHECK_THROWS(arrival_rate(bad, 20));
  }

  TEST_CASE("rank probabilities follow the power law") {
    const auto cat = small_catalog(50);
    const PopularityState pop(cat, 0.8, 9);
    // ratio of the top two ranks is 2^0.8
    CHECK(pop.rank_probability(0) / pop.rank_probability(1) ==
          doctest::Approx(1.7411011265922482).epsilon(1e-12));
    double total = 0;
    for (std::size_t r = 0; r < 50; ++r) {
      total += pop.rank_probability(r);
      if (r > 0) CHECK(pop.rank_probability(r) < pop.rank_probability(r - 1));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("sampling matches the rank distribution") {
    const auto cat = small_catalog(50);
    const PopularityState pop(cat, 0.8, 9);
    std::map<std::int64_t, std::size_t> rank_of;
    for (std::size_t r = 0; r < pop.ranked_ids().size(); ++r) rank_of[pop.ranked_ids()[r]] = r;

    Rng rng(1234);
    const int n = 100'000;
    std::vector<double> observed(50, 0);
    for (int i = 0; i < n; ++i) observed[rank_of.at(pop.sample(rng))] += 1;

    CHECK(observed[0] / observed[1] == doctest::Approx(1.7411011265922482).epsilon(0.02));

    // Wilson-Hilferty normal approximation of the chi-square statistic stays
    // under the 99th percentile for this seed.
    double chi2 = 0;
    for (std::size_t r = 0; r < 50; ++r) {
      const double expect = n * pop.rank_probability(r);
      chi2 += (observed[r] - expect) * (observed[r] - expect) / expect;
    }
    const double k = 49;
    const double z =
        (std::cbrt(chi2 / k) - (1.0 - 2.0 / (9.0 * k))) / std::sqrt(2.0 / (9.0 * k));
    CHECK(z < 2.3263478740408408);
  }

  TEST_CASE("a shift permutes ranks but keeps the probability ladder") {
    const auto cat = small_catalog(30);
    PopularityState pop(cat, 0.8, 3);
    const auto before = pop.ranked_ids();
    const double p0 = pop.rank_probability(0);
    pop.apply_shift(777);
    const auto after = pop.ranked_ids();
    CHECK(after != before);
    auto sb = before, sa = after;
    std::sort(sb.begin(), sb.end());
    std::sort(sa.begin(), sa.end());
    CHECK(sa == sb);
    CHECK(pop.rank_probability(0) == p0);

    PopularityState again(cat, 0.8, 3);
    again.apply_shift(777);
    CHECK(again.ranked_ids() == after);
  }

  TEST_CASE("released contents enter the top third of the ranking") {
    const auto cat = small_catalog(30);
    PopularityState pop(cat, 0.8, 3);
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
      const std::int64_t fresh_id = 1000 + i;
      const auto before = pop.ranked_ids();
      pop.insert_released(fresh_id, rng);
      const auto& ranked = pop.ranked_ids();
      REQUIRE(ranked.size() == before.size() + 1);
      const auto pos = static_cast<std::size_t>(
          std::find(ranked.begin(), ranked.end(), fresh_id) - ranked.begin());
      CHECK(pos < std::max<std::size_t>(before.size() / 3, 1));
      for (const auto id : before) CHECK(std::find(ranked.begin(), ranked.end(), id) != ranked.end());
    }
  }

  TEST_CASE("per-slot sampling stamps slots, nodes, and arrival order") {
    const auto cat = small_catalog(20);
    const PopularityState pop(cat, 0.8, 2);
    WorkloadProfile profile;
    Rng rng(8);
    const auto reqs = sample_requests(profile, pop, 3, 150, rng, 17);
    for (std::size_t i = 0; i < reqs.size(); ++i) {
      CHECK(reqs[i].slot == 150);
      CHECK(reqs[i].node_id == 3);
      CHECK(reqs[i].arrival_order == 17 + static_cast<int>(i));
      CHECK(cat.has_id(reqs[i].content_id));
    }

    WorkloadProfile idle;
    idle.phases = {{0, 0.0}};
    Rng rng2(8);
    CHECK(sample_requests(idle, pop, 0, 5, rng2).empty());
  }

  TEST_CASE("workload state applies scheduled shifts and releases") {
    auto cat = small_catalog(20);
    WorkloadProfile profile;
    profile.shifts = {{7, 4242}};
    profile.releases = {{5, catalog::ModalityClass::haptic_high_fidelity},
                        {5, catalog::ModalityClass::audio_mp3}};
    catalog::CatalogSpec sizes;
    WorkloadState state(profile, sizes, cat, 99);

    const auto ranked_before = state.popularity().ranked_ids();
    for (std::int64_t slot = 0; slot < 5; ++slot) (void)state.step(slot, 2);
    CHECK(cat.contents.size() == 20);

    (void)state.step(5, 2);
    REQUIRE(cat.contents.size() == 22);
    CHECK(state.released_ids() == std::vector<std::int64_t>{21, 22});
    CHECK(cat.by_id(21).modality_class == catalog::ModalityClass::haptic_high_fidelity);
    CHECK(cat.by_id(21).size_bytes >= sizes.haptic_size_min_bytes);
    CHECK(cat.by_id(21).size_bytes <= sizes.haptic_size_max_bytes);
    CHECK(cat.by_id(22).modality == catalog::Modality::audio);
    CHECK(state.popularity().ranked_ids().size() == 22);

    (void)state.step(6, 2);
    const auto ranked_pre_shift = state.popularity().ranked_ids();
    (void)state.step(7, 2);
    CHECK(state.popularity().ranked_ids() != ranked_pre_shift);
    CHECK(ranked_before.size() + 2 == state.popularity().ranked_ids().size());
  }

  TEST_CASE("workload state numbers arrivals globally and reproducibly") {
    auto cat1 = small_catalog(20);
    auto cat2 = small_catalog(20);
    WorkloadProfile profile;
    catalog::CatalogSpec sizes;
    WorkloadState a(profile, sizes, cat1, 31), b(profile, sizes, cat2, 31);

    std::vector<Request> ta, tb;
    for (std::int64_t slot = 0; slot < 60; ++slot) {
      auto ra = a.step(slot, 3);
      auto rb = b.step(slot, 3);
      int order = 0;
      int last_node = 0;
      for (const auto& r : ra) {
        CHECK(r.arrival_order == order++);
        CHECK(r.node_id >= last_node);  // node-major FCFS within the slot
        last_node = r.node_id;
      }
      ta.insert(ta.end(), ra.begin(), ra.end());
      tb.insert(tb.end(), rb.begin(), rb.end());
    }
    REQUIRE(ta.size() == tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i) {
      CHECK(ta[i].slot == tb[i].slot);
      CHECK(ta[i].content_id == tb[i].content_id);
    }
    // 60 slots x 3 nodes x rate 2 -> about 360 arrivals
    CHECK(total_requests(ta) > 250);
    CHECK(total_requests(ta) < 480);
  }

  TEST_CASE("trace csv re-emission is byte-identical") {
    auto cat = small_catalog(15);
    WorkloadProfile profile;
    profile.horizon_slots = 40;
    catalog::CatalogSpec sizes;
    WorkloadState state(profile, sizes, cat, 12);
    std::vector<Request> trace;
    for (std::int64_t slot = 0; slot < 40; ++slot) {
      const auto r = state.step(slot, 2);
      trace.insert(trace.end(), r.begin(), r.end());
    }
    const std::string p1 = "test_trace_a.csv", p2 = "test_trace_b.csv";
    write_trace_csv(trace, p1);
    const auto back = read_trace_csv(p1);
    REQUIRE(back.size() == trace.size());
    write_trace_csv(back, p2);
    CHECK(slurp(p1) == slurp(p2));
    CHECK_FALSE(slurp(p1).empty());
    std::remove(p1.c_str());
    std::remove(p2.c_str());
  }
}
