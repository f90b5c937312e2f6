#pragma once

#include <cstddef>
#include <new>

namespace sketchnmf {

/// Counters for matrix/vector storage allocated on the current thread while an
/// AllocationAudit is active. Units are elements (doubles), not bytes.
struct AllocationStats {
  std::size_t largest_allocation = 0;
  std::size_t allocation_count = 0;
  std::size_t live = 0;
  std::size_t peak_live = 0;
};

namespace detail {
struct AuditState {
  AllocationStats stats;
  int depth = 0;
};
AuditState& audit_state() noexcept;
void audit_allocate(std::size_t n) noexcept;
void audit_deallocate(std::size_t n) noexcept;
}  // namespace detail

/// RAII scope that records every DenseMatrix / Vector allocation made on this
/// thread. Storage that was allocated before the scope opened is not counted,
/// but its release inside the scope is ignored rather than underflowing.
class AllocationAudit {
 public:
  AllocationAudit() noexcept;
  ~AllocationAudit();
  AllocationAudit(const AllocationAudit&) = delete;
  AllocationAudit& operator=(const AllocationAudit&) = delete;

  AllocationStats stats() const noexcept;

 private:
  AllocationStats saved_;
};

/// std::allocator drop-in that reports to the thread's active audit.
template <class T>
struct AuditedAllocator {
  using value_type = T;

  AuditedAllocator() noexcept = default;
  template <class U>
  AuditedAllocator(const AuditedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    detail::audit_allocate(n);
    return static_cast<T*>(::operator new(n * sizeof(T)));
  }
  void deallocate(T* p, std::size_t n) noexcept {
    detail::audit_deallocate(n);
    ::operator delete(p);
  }

  template <class U>
  bool operator==(const AuditedAllocator<U>&) const noexcept {
    return true;
  }
};

}  // namespace sketchnmf
