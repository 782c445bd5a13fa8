#include "crshare/admission.h"

#include <algorithm>

namespace crshare::engine {

std::vector<ChannelId> plan_release(int own_free_slots, std::span<const BorrowedLoad> borrowed) {
  std::vector<BorrowedLoad> order(borrowed.begin(), borrowed.end());
  std::sort(order.begin(), order.end(), [](const BorrowedLoad& a, const BorrowedLoad& b) {
    return a.calls != b.calls ? a.calls < b.calls : a.channel < b.channel;
  });
  std::vector<ChannelId> released;
  for (const auto& b : order) {
    if (b.calls <= own_free_slots) {
      own_free_slots -= b.calls;
      released.push_back(b.channel);
    }
  }
  return released;
}

}  // namespace crshare::engine
