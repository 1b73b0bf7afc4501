#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "ricsec/ran_sim.hpp"

using namespace ricsec;

namespace {

SliceTable embb_table(std::initializer_list<std::uint32_t> ues, std::int64_t budget = 100) {
  SliceTable t({SliceConfig{kQuarantineSlice, 0, "quarantine"}, SliceConfig{SliceId{1}, budget, "eMBB"}});
  for (auto ue : ues) t.bind(UeId{ue}, SliceId{1});
  return t;
}

const UeAllocation& of(const std::vector<UeAllocation>& a, std::uint32_t ue) {
  return *std::find_if(a.begin(), a.end(), [&](const auto& x) { return x.ue.value == ue; });
}

/// Integer largest-remainder split; demands in whole kbps so remainders are exact.
std::map<std::uint32_t, std::int64_t> reference_split(
    std::int64_t budget, const std::vector<std::pair<std::uint32_t, std::int64_t>>& demands) {
  const auto total = std::accumulate(demands.begin(), demands.end(), std::int64_t{0},
                                     [](auto acc, const auto& d) { return acc + d.second; });
  std::map<std::uint32_t, std::int64_t> out;
  std::vector<std::tuple<std::int64_t, std::uint32_t>> rem;
  std::int64_t used = 0;
  for (const auto& [ue, d] : demands) {
    out[ue] = budget * d / total;
    used += out[ue];
    rem.emplace_back(-(budget * d % total), ue);
  }
  std::sort(rem.begin(), rem.end());
  for (std::size_t k = 0; used < budget; ++k, ++used) ++out[std::get<1>(rem[k])];
  return out;
}

}  // namespace

TEST_CASE("three equal 10 Mbps UEs share 100 PRBs equally") {
  const CellConfig cell;
  const std::vector<UeProfile> ues{{UeId{1}}, {UeId{2}}, {UeId{3}}};
  const auto a = schedule_tick(embb_table({1, 2, 3}), cell, ues, 0);
  REQUIRE(a.size() == 3);
  CHECK(of(a, 1).prbs == 34);
  CHECK(of(a, 2).prbs == 33);
  CHECK(of(a, 3).prbs == 33);
  for (const auto& x : a) CHECK(std::abs(x.achieved_mbps - 10.0) <= 0.3 + 1e-9);
}

TEST_CASE("a 30 Mbps request takes 60 PRBs from two 10 Mbps UEs") {
  // 100 * 30/50 = 60 and 100 * 10/50 = 20; 60 * 0.3 = 18 Mbps, 20 * 0.3 = 6 Mbps.
  const CellConfig cell;
  const std::vector<UeProfile> ues{{UeId{1}, 30.0}, {UeId{2}, 10.0}, {UeId{3}, 10.0}};
  const auto a = schedule_tick(embb_table({1, 2, 3}), cell, ues, 0);
  CHECK(of(a, 1).prbs == 60);
  CHECK(of(a, 2).prbs == 20);
  CHECK(of(a, 3).prbs == 20);
  CHECK(of(a, 1).achieved_mbps == doctest::Approx(18.0));
  CHECK(of(a, 2).achieved_mbps == doctest::Approx(6.0));
  CHECK(of(a, 3).achieved_mbps == doctest::Approx(6.0));
}

TEST_CASE("quarantined UEs get nothing") {
  const CellConfig cell;
  auto table = embb_table({2, 3});
  table.bind(UeId{1}, kQuarantineSlice);
  const std::vector<UeProfile> ues{{UeId{1}, 40.0}, {UeId{2}}, {UeId{3}}};
  const auto a = schedule_tick(table, cell, ues, 0);
  CHECK(of(a, 1).prbs == 0);
  CHECK(of(a, 1).achieved_mbps == 0.0);
  CHECK(of(a, 2).prbs == 50);
  CHECK(of(a, 2).achieved_mbps == doctest::Approx(10.0));
}

TEST_CASE("attacker demand switches at onset") {
  UeProfile p{UeId{1}, 10.0, true, 5000, 4.0};
  CHECK(p.requested_mbps(4999) == 10.0);
  CHECK(p.requested_mbps(5000) == 40.0);
  UeProfile legit{UeId{2}, 10.0, false, 0, 4.0};
  CHECK(legit.requested_mbps(1'000'000) == 10.0);
}

TEST_CASE("scheduler matches an integer largest-remainder reference") {
  std::mt19937_64 rng(99);
  const CellConfig cell{20.0, 100, 0.3, 0.0};
  for (int trial = 0; trial < 500; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 8)(rng);
    const auto budget = std::uniform_int_distribution<std::int64_t>(1, 100)(rng);
    SliceTable table({SliceConfig{SliceId{1}, budget, "s"}});
    std::vector<UeProfile> profiles;
    std::vector<std::pair<std::uint32_t, std::int64_t>> demands;
    for (int i = 0; i < n; ++i) {
      const auto kbps = std::uniform_int_distribution<std::int64_t>(1, 50'000)(rng);
      profiles.push_back(UeProfile{UeId{static_cast<std::uint32_t>(i + 1)}, kbps / 1000.0});
      demands.emplace_back(i + 1, kbps);
      table.bind(UeId{static_cast<std::uint32_t>(i + 1)}, SliceId{1});
    }
    const auto got = schedule_tick(table, cell, profiles, 0);
    const auto want = reference_split(budget, demands);
    std::int64_t sum = 0;
    for (const auto& a : got) {
      CHECK(a.prbs == want.at(a.ue.value));
      CHECK(a.achieved_mbps <= a.requested_mbps + 1e-12);
      sum += a.prbs;
    }
    CHECK(sum == budget);
  }
}

TEST_CASE("conservation and fair split hold across slices") {
  std::mt19937_64 rng(5);
  const CellConfig cell;
  for (int trial = 0; trial < 300; ++trial) {
    const auto b1 = std::uniform_int_distribution<std::int64_t>(0, 100)(rng);
    const auto b2 = std::uniform_int_distribution<std::int64_t>(0, 100 - b1)(rng);
    SliceTable table({SliceConfig{SliceId{1}, b1, "a"}, SliceConfig{SliceId{2}, b2, "b"}});
    std::vector<UeProfile> profiles;
    const double equal = std::uniform_real_distribution<double>(0.5, 30.0)(rng);
    for (std::uint32_t ue = 1; ue <= 9; ++ue) {
      const auto slice = SliceId{ue % 3};
      table.bind(UeId{ue}, slice);
      profiles.push_back(UeProfile{UeId{ue}, slice.value == 1 ? equal : 1.0 + ue});
    }
    table.validate(cell);
    const auto got = schedule_tick(table, cell, profiles, 0);
    std::map<std::uint32_t, std::int64_t> per_slice;
    std::int64_t lo = 1000, hi = -1;
    for (const auto& a : got) {
      per_slice[a.slice.value] += a.prbs;
      if (a.slice == kQuarantineSlice) CHECK(a.prbs == 0);
      if (a.slice.value == 1) {
        lo = std::min(lo, a.prbs);
        hi = std::max(hi, a.prbs);
      }
    }
    CHECK(per_slice[1] <= b1);
    CHECK(per_slice[2] <= b2);
    CHECK(per_slice[0] + per_slice[1] + per_slice[2] <= cell.total_prbs);
    CHECK(hi - lo <= 1);
  }
}

TEST_CASE("emit_kpm_reports calibrates tx_pkts to 312 per 10 Mbps second") {
  auto table = embb_table({1, 2, 3});
  const CellConfig cell;
  const std::vector<UeProfile> ues{{UeId{1}, 10.0, true, 0, 4.0}, {UeId{2}}, {UeId{3}}};

  SUBCASE("legitimate UEs stay at the bound") {
    const auto a = schedule_tick(table, cell, {{UeId{1}}, {UeId{2}}, {UeId{3}}}, 0);
    for (const auto& r : emit_kpm_reports(a, table, 1000, 1000)) {
      CHECK(r.tx_pkts == 312);
      CHECK(r.num_ues == 3);
      CHECK(validate_report(r, 100).empty());
    }
  }
  SUBCASE("attacker exceeds 312 per active UE") {
    const auto a = schedule_tick(table, cell, ues, 0);
    const auto reports = emit_kpm_reports(a, table, 1000, 1000);
    // 40 Mbps * 1 s * 31.2 = 1248 > 312 * 3
    CHECK(reports[0].tx_pkts == 1248);
    CHECK(reports[0].tx_pkts > 312 * reports[0].num_ues);
  }
  SUBCASE("quarantined attacker still floods the uplink but gets no downlink") {
    table.bind(UeId{1}, kQuarantineSlice);
    const auto a = schedule_tick(table, cell, ues, 0);
    const auto reports = emit_kpm_reports(a, table, 1000, 1000);
    const auto& r1 = *std::find_if(reports.begin(), reports.end(),
                                   [](const auto& r) { return r.ue == UeId{1}; });
    CHECK(r1.tx_pkts == 1248);
    CHECK(r1.dl_bytes == 0);
    CHECK(r1.dl_prbs == 0);
    CHECK(r1.num_ues == 2);
  }
  SUBCASE("dl_bytes follow the achieved rate") {
    const auto a = schedule_tick(table, cell, {{UeId{1}}, {UeId{2}}, {UeId{3}}}, 0);
    const auto reports = emit_kpm_reports(a, table, 1000, 1000);
    CHECK(reports[0].dl_bytes == 1'250'000);  // 10 Mbps for 1 s
    CHECK(reports[1].dl_bytes == 1'237'500);  // 9.9 Mbps
  }
  SUBCASE("interval must be within 1..1000 ms") {
    const auto a = schedule_tick(table, cell, ues, 0);
    CHECK_THROWS_AS(emit_kpm_reports(a, table, 0, 0), ConfigError);
    CHECK_THROWS_AS(emit_kpm_reports(a, table, 0, 1001), ConfigError);
    CHECK_NOTHROW(emit_kpm_reports(a, table, 0, 1));
  }
}

TEST_CASE("apply_slice_control") {
  const auto table = embb_table({1, 2, 3});
  SUBCASE("rebind to quarantine") {
    const auto res = apply_slice_control(table, SliceControlReq{UeId{1}, kQuarantineSlice});
    CHECK(res.ack.success);
    CHECK(res.table.is_quarantined(UeId{1}));
    CHECK(res.table.active_ue_count() == 2);
  }
  SUBCASE("unknown UE") {
    const auto res = apply_slice_control(table, SliceControlReq{UeId{99}, kQuarantineSlice});
    CHECK_FALSE(res.ack.success);
    CHECK(res.table == table);
  }
  SUBCASE("unknown slice") {
    const auto res = apply_slice_control(table, SliceControlReq{UeId{1}, SliceId{7}});
    CHECK_FALSE(res.ack.success);
  }
  SUBCASE("already quarantined is an idempotent success") {
    auto once = apply_slice_control(table, SliceControlReq{UeId{1}, kQuarantineSlice});
    auto twice = apply_slice_control(once.table, SliceControlReq{UeId{1}, kQuarantineSlice});
    CHECK(twice.ack.success);
    CHECK(twice.table == once.table);
  }
}

TEST_CASE("attack degrades legit UEs and quarantine restores them next tick") {
  RicBus bus;
  bus.register_component("ss");
  bus.subscribe("ss", {MessageKind::SliceControlAck});
  E2Node node(bus, CellConfig{}, embb_table({1, 2, 3}),
              {{UeId{1}, 10.0, true, 1000, 4.0}, {UeId{2}}, {UeId{3}}}, 1000, 1);

  const auto before = node.tick(900);
  const auto during = node.tick(1000);
  for (std::uint32_t ue : {2u, 3u}) {
    CHECK(of(during, ue).achieved_mbps < of(before, ue).achieved_mbps);
  }

  bus.publish("ss", SliceControlReq{UeId{1}, kQuarantineSlice}, 1050);
  node.handle_controls(1051);
  const auto acks = bus.drain("ss", 1052);
  REQUIRE(acks.size() == 1);
  CHECK(std::get<SliceControlAck>(acks[0].payload).success);

  const auto after = node.tick(1100);
  CHECK(of(after, 1).prbs == 0);
  for (std::uint32_t ue : {2u, 3u}) {
    CHECK(of(after, ue).achieved_mbps >= of(before, ue).achieved_mbps);
    CHECK(of(after, ue).achieved_mbps == doctest::Approx(10.0));
  }
}

TEST_CASE("slice table validation") {
  const CellConfig cell;
  SliceTable over({SliceConfig{SliceId{1}, 80, "a"}, SliceConfig{SliceId{2}, 30, "b"}});
  CHECK_THROWS_AS(over.validate(cell), ConfigError);

  SliceTable bad_quarantine({SliceConfig{kQuarantineSlice, 10, "q"}});
  CHECK_THROWS_AS(bad_quarantine.validate(cell), ConfigError);

  SliceTable ok;
  CHECK(ok.find_slice(kQuarantineSlice) != nullptr);
  CHECK_THROWS_AS(ok.bind(UeId{1}, SliceId{5}), ConfigError);
}

TEST_CASE("rate noise keeps achieved within [0, requested]") {
  RicBus bus;
  E2Node node(bus, CellConfig{20.0, 100, 0.3, 0.2}, embb_table({1, 2, 3}),
              {{UeId{1}}, {UeId{2}}, {UeId{3}}}, 1000, 7);
  bool varied = false;
  for (VirtualMs t = 0; t < 5000; t += 100) {
    for (const auto& a : node.tick(t)) {
      CHECK(a.achieved_mbps >= 0.0);
      CHECK(a.achieved_mbps <= a.requested_mbps);
      if (std::abs(a.achieved_mbps - 10.0) > 0.5) varied = true;
    }
  }
  CHECK(varied);
}
