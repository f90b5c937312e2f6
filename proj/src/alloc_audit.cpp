#include "sketchnmf/alloc_audit.hpp"

#include <algorithm>

namespace sketchnmf {
namespace detail {

AuditState& audit_state() noexcept {
  thread_local AuditState state;
  return state;
}

void audit_allocate(std::size_t n) noexcept {
  auto& s = audit_state();
  if (s.depth == 0) return;
  s.stats.largest_allocation = std::max(s.stats.largest_allocation, n);
  ++s.stats.allocation_count;
  s.stats.live += n;
  s.stats.peak_live = std::max(s.stats.peak_live, s.stats.live);
}

void audit_deallocate(std::size_t n) noexcept {
  auto& s = audit_state();
  if (s.depth == 0) return;
  s.stats.live = n > s.stats.live ? 0 : s.stats.live - n;
}

}  // namespace detail

AllocationAudit::AllocationAudit() noexcept {
  auto& s = detail::audit_state();
  saved_ = s.stats;
  s.stats = AllocationStats{};
  ++s.depth;
}

AllocationAudit::~AllocationAudit() {
  auto& s = detail::audit_state();
  --s.depth;
  s.stats = saved_;
}

AllocationStats AllocationAudit::stats() const noexcept { return detail::audit_state().stats; }

}  // namespace sketchnmf
