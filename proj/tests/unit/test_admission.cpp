#include <doctest.h>

#include <algorithm>
#include <random>

#include "crshare/admission.h"

using namespace crshare;
using namespace crshare::engine;

TEST_CASE("overload detection") {
  CHECK_FALSE(detect_overload({0, 3, 10}));
  CHECK(detect_overload({30, 3, 10}));
  for (int calls = 0; calls <= 40; ++calls) {
    int free_slots = 0;
    for (int ch = 0; ch < 3; ++ch) {
      for (int slot = 0; slot < 10; ++slot) free_slots += (ch * 10 + slot >= calls) ? 1 : 0;
    }
    CHECK(detect_overload({calls, 3, 10}) == (free_slots == 0));
  }
  CHECK(detect_overload({0, 0, 10}));
}

TEST_CASE("select_channel tie-breaks") {
  auto freq = [](ChannelId c) { return c.value == 0 ? 900.0 : 1800.0; };
  CHECK_FALSE(select_channel(std::span<const crnet::AvailabilityEntry>{}, freq));
  const std::vector<crnet::AvailabilityEntry> two{{ChannelId(0), 0.8, 1, 0, NodeId(0)},
                                                  {ChannelId(1), 0.8, 1, 0, NodeId(0)}};
  CHECK(select_channel(std::span(two), freq) == ChannelId(1));
}

TEST_CASE("select_channel equals a full-scan argmax") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<crnet::AvailabilityEntry> cands;
    std::vector<double> freqs(60);
    for (auto& f : freqs) f = 900.0 + 5.0 * static_cast<double>(rng() % 8);
    for (int i = 0; i < 50; ++i) {
      cands.push_back({ChannelId(static_cast<std::uint32_t>(rng() % 60)), (rng() % 5) / 4.0, 1, 0, NodeId(0)});
    }
    auto freq = [&](ChannelId c) { return freqs[c.index()]; };
    auto sorted = cands;
    std::sort(sorted.begin(), sorted.end(), [&](const auto& a, const auto& b) {
      return std::tuple(-a.availability_probability, -freq(a.channel), a.channel.value) <
             std::tuple(-b.availability_probability, -freq(b.channel), b.channel.value);
    });
    CHECK(select_channel(std::span(cands), freq) == sorted.front().channel);
  }
}

TEST_CASE("plan_release basics") {
  CHECK(plan_release(10, {}).empty());
  const std::vector<BorrowedLoad> zero{{ChannelId(4), 0}, {ChannelId(2), 0}};
  CHECK(plan_release(0, zero) == std::vector<ChannelId>{ChannelId(2), ChannelId(4)});
  const std::vector<BorrowedLoad> heavy{{ChannelId(1), 5}};
  CHECK(plan_release(4, heavy).empty());
  CHECK(plan_release(5, heavy) == std::vector<ChannelId>{ChannelId(1)});
}

TEST_CASE("staircase release equals greedy repacking") {
  // Repeatedly take the least-loaded remaining channel (lowest id on ties)
  // while it still fits; skip it otherwise.
  auto oracle = [](int free_slots, std::vector<BorrowedLoad> loads) {
    std::vector<ChannelId> out;
    while (!loads.empty()) {
      auto it = std::min_element(loads.begin(), loads.end(), [](const auto& a, const auto& b) {
        return std::pair(a.calls, a.channel.value) < std::pair(b.calls, b.channel.value);
      });
      if (it->calls <= free_slots) {
        free_slots -= it->calls;
        out.push_back(it->channel);
      }
      loads.erase(it);
    }
    return out;
  };

  std::vector<BorrowedLoad> stairs{{ChannelId(9), 4}, {ChannelId(7), 1}, {ChannelId(8), 3}, {ChannelId(6), 2}};
  for (int free_slots = 0; free_slots <= 12; ++free_slots) {
    CHECK(plan_release(free_slots, stairs) == oracle(free_slots, stairs));
  }

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<BorrowedLoad> loads;
    const int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) loads.push_back({ChannelId(static_cast<std::uint32_t>(10 + i)), static_cast<int>(rng() % 11)});
    const int free_slots = static_cast<int>(rng() % 30);
    CHECK(plan_release(free_slots, loads) == oracle(free_slots, loads));
  }
}
