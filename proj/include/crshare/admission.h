#pragma once

#include <optional>
#include <span>
#include <vector>

#include "crshare/crnet.h"
#include "crshare/ids.h"

namespace crshare::engine {

// Occupancy of a cell's own licensed channels as seen by one base station.
struct OwnLoad {
  int calls_on_own = 0;     // active calls carried on own channels
  int usable_channels = 0;  // own channels not lent out in this cell
  int users_per_channel = 10;

  int capacity() const { return usable_channels * users_per_channel; }
  int free_slots() const { return capacity() - calls_on_own; }
};

// True iff one more call would exceed the own-channel capacity.
inline bool detect_overload(const OwnLoad& load) { return load.calls_on_own + 1 > load.capacity(); }

// Argmax under (availability desc, centre frequency desc, channel id asc).
// `frequency_of` maps a channel id to its centre frequency.
template <typename FrequencyOf>
std::optional<ChannelId> select_channel(std::span<const crnet::AvailabilityEntry> candidates,
                                        FrequencyOf&& frequency_of) {
  const crnet::AvailabilityEntry* best = nullptr;
  double best_f = 0.0;
  for (const auto& e : candidates) {
    const double f = frequency_of(e.channel);
    if (best == nullptr || e.availability_probability > best->availability_probability ||
        (e.availability_probability == best->availability_probability &&
         (f > best_f || (f == best_f && e.channel < best->channel)))) {
      best = &e;
      best_f = f;
    }
  }
  if (best == nullptr) return std::nullopt;
  return best->channel;
}

struct BorrowedLoad {
  ChannelId channel;
  int calls = 0;
};

// Greedy repacking after a departure: visit borrowed channels by ascending
// load (then id) and release each whose calls fit in the remaining own free
// slots. Returns the channels to release, in release order.
std::vector<ChannelId> plan_release(int own_free_slots, std::span<const BorrowedLoad> borrowed);

}  // namespace crshare::engine
