#ifndef TIERSIM_LRU_H_
#define TIERSIM_LRU_H_

#include <span>

#include "tiersim/types.h"

namespace tiersim {

struct Page {
  ContainerId owner = 0;
  Tier tier = Tier::kLocal;
  bool allocated = false;
  bool active = false;
  bool candidate = false;  // passed the two-touch filter while on CXL
  Tick last_access = kNever;
  Tick last_touch = kNever;  // last recorded access since placement
  PageId prev = kNoPage;
  PageId next = kNoPage;
};

// Doubly linked list threaded through Page::prev/next. Head is the most
// recently used end.
class LruList {
 public:
  PageId head() const { return head_; }
  PageId tail() const { return tail_; }
  PageCount size() const { return size_; }
  bool empty() const { return size_ == 0; }

  void PushHead(std::span<Page> pages, PageId id);
  void PushTail(std::span<Page> pages, PageId id);
  void Remove(std::span<Page> pages, PageId id);

 private:
  PageId head_ = kNoPage;
  PageId tail_ = kNoPage;
  PageCount size_ = 0;
};

}  // namespace tiersim

#endif  // TIERSIM_LRU_H_
