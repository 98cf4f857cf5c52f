#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "relay/capregion.hpp"
#include "relay/fo_solver.hpp"
#include "relay/netmodel.hpp"
#include "relay/protocols.hpp"
#include "relay/three_node.hpp"

using namespace relay;

namespace {

NetworkInstance draw(int n, double snr, std::uint64_t stream) {
  SubstreamRng rng(321, stream);
  return make_instance(uniform_means(n), snr, rng);
}

FoProblem problem(const NetworkInstance& net) { return FoProblem{net, false, std::nullopt}; }

}  // namespace

TEST_CASE("rate zero is always feasible") {
  const auto net = draw(4, 5.0, 0);
  const auto check = fo_feasible(problem(net), 0.0);
  CHECK(check.feasible);
  CHECK(validate_rate_result(net, check.witness).ok);
}

TEST_CASE("three-node feasibility flips at the analytic optimum") {
  for (std::uint64_t i = 0; i < 8; ++i) {
    const auto net = draw(3, 10.0, i);
    const double x = solve_three_node(net.gains(0, 2), net.gains(0, 1), net.gains(1, 2), 10.0).rate;
    CHECK(fo_feasible(problem(net), x * (1.0 - 1e-3)).feasible);
    CHECK(!fo_feasible(problem(net), x * (1.0 + 1e-3)).feasible);
  }
}

TEST_CASE("rates above the destination MA cut are infeasible") {
  const auto net = draw(4, 8.0, 3);
  const double cap = capacity(net.snr * (net.gains(0, 3) + net.gains(1, 3) + net.gains(2, 3)));
  CHECK(!fo_feasible(problem(net), cap + 1e-3).feasible);
  CHECK(fo_rate_upper_screen(net) <= cap);
}

TEST_CASE("degenerate network with dead relay links reduces to direct") {
  NetworkInstance net;
  net.n_nodes = 4;
  net.mean_gains = uniform_means(4);
  net.gains = Matrix(4, 4, 0.0);
  net.gains(0, 3) = 1.3;
  net.snr = 10.0;
  const auto res = solve_fo(problem(net));
  CHECK(res.rate == doctest::Approx(capacity(13.0)).epsilon(1e-4));
  CHECK(validate_rate_result(net, res).ok);
}

TEST_CASE("witnesses validate and conserve flow") {
  for (std::uint64_t i = 0; i < 12; ++i) {
    const auto net = draw(4, i % 2 ? 3.0 : 30.0, 100 + i);
    const auto res = solve_fo(problem(net));
    const auto report = validate_rate_result(net, res);
    INFO(report.detail);
    CHECK(report.ok);
    for (double r : conservation_residuals(res.flows)) CHECK(std::abs(r) <= 1e-7);
    CHECK(res.rate == doctest::Approx(reduced_min_cut(res.flows)).epsilon(1e-9));
    CHECK(std::abs(res.schedule.total_length() - 1.0) < 1e-9);
  }
}

TEST_CASE("dominates direct and GLS") {
  for (std::uint64_t i = 0; i < 15; ++i) {
    const auto net = draw(4, 12.0, 200 + i);
    const auto res = solve_fo(problem(net));
    CHECK(res.rate >= direct_transmission(net).rate - 1e-5);
    CHECK(res.rate >= gls(net).rate - 1e-5);
  }
}

TEST_CASE("all-zero gains solve to rate zero under both objectives") {
  NetworkInstance net;
  net.n_nodes = 4;
  net.mean_gains = uniform_means(4);
  net.gains = Matrix(4, 4, 0.0);
  net.snr = 10.0;
  CHECK(solve_fo(problem(net)).rate == 0.0);
  CHECK(solve_fo_fullcuts(problem(net)).rate == 0.0);
}

TEST_CASE("full cut enumeration matches the reduced pair") {
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto net = draw(4, 9.0, 300 + i);
    const double a = solve_fo(problem(net)).rate;
    const double b = solve_fo_fullcuts(problem(net)).rate;
    CHECK(a == doctest::Approx(b).epsilon(1e-4));
  }
}

TEST_CASE("slot order does not change the optimum") {
  const auto net = draw(4, 11.0, 400);
  const double base = solve_fo(problem(net)).rate;
  SlotSchedule permuted = canonical_schedule(4);
  std::rotate(permuted.slots.begin(), permuted.slots.begin() + 2, permuted.slots.end());
  const double rotated = solve_fo(FoProblem{net, false, permuted}).rate;
  CHECK(base == doctest::Approx(rotated).epsilon(2e-5));
}

TEST_CASE("rate is nondecreasing in SNR") {
  for (std::uint64_t i = 0; i < 6; ++i) {
    SubstreamRng rng(55, i);
    const Matrix gains = sample_gains(uniform_means(4), rng);
    NetworkInstance lo{4, uniform_means(4), gains, 4.0};
    NetworkInstance hi{4, uniform_means(4), gains, 7.0};
    CHECK(solve_fo(problem(hi)).rate >= solve_fo(problem(lo)).rate - 1e-6);
  }
}

TEST_CASE("witness scaling keeps power constraints feasible") {
  // Perspective property: scaling flows and slot lengths together by lambda
  // cannot increase any capacity residual.
  const auto net = draw(4, 10.0, 500);
  const auto res = solve_fo(problem(net));
  const double slack = 1e-6 * (1.0 + net.snr);
  for (double lambda : {0.25, 0.6, 1.0}) {
    for (int s = 0; s < res.flows.slot_count(); ++s) {
      const auto& slot = res.schedule.slots[s];
      const double t = lambda * slot.length;
      if (t <= 0.0) continue;
      if (slot.kind == SlotKind::Broadcast) {
        BcDemand d{slot.hub, {}, t};
        for (std::size_t j = 0; j < slot.peers.size(); ++j)
          if (net.gains(slot.hub, slot.peers[j]) >= kDeadGain)
            d.targets.emplace_back(slot.peers[j], lambda * res.flows.flow(s, static_cast<int>(j)));
        CHECK(t * (bc_min_snr(d, net.gains) - net.snr) <= slack);
      } else {
        for (std::size_t j = 0; j < slot.peers.size(); ++j) {
          double flow_sum = 0.0, gain_sum = 0.0;
          for (std::size_t l = 0; l <= j; ++l) {
            flow_sum += lambda * res.flows.flow(s, static_cast<int>(l));
            gain_sum += net.gains(slot.peers[l], slot.hub);
          }
          CHECK(flow_sum - t * std::log1p(net.snr * gain_sum) <= slack);
        }
      }
    }
  }
}

TEST_CASE("achieves-query agrees with the full solve") {
  for (std::uint64_t i = 0; i < 8; ++i) {
    const auto net = draw(4, 10.0, 600 + i);
    const double x = solve_fo(problem(net)).rate;
    CHECK(fo_achieves(problem(net), x - 1e-3));
    CHECK(!fo_achieves(problem(net), x + 1e-3));
  }
}

TEST_CASE("configuration guards") {
  const auto net = draw(4, 10.0, 700);
  FoProblem p = problem(net);
  p.network.n_nodes = 9;
  CHECK_THROWS_AS(solve_fo(p), ConfigError);
  const auto net7 = draw(7, 10.0, 701);
  CHECK_THROWS_AS(solve_fo_fullcuts(problem(net7)), ConfigError);
}
