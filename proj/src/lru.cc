#include "tiersim/lru.h"

namespace tiersim {

void LruList::PushHead(std::span<Page> pages, PageId id) {
  Page& p = pages[id];
  p.prev = kNoPage;
  p.next = head_;
  if (head_ != kNoPage) pages[head_].prev = id;
  head_ = id;
  if (tail_ == kNoPage) tail_ = id;
  ++size_;
}

void LruList::PushTail(std::span<Page> pages, PageId id) {
  Page& p = pages[id];
  p.next = kNoPage;
  p.prev = tail_;
  if (tail_ != kNoPage) pages[tail_].next = id;
  tail_ = id;
  if (head_ == kNoPage) head_ = id;
  ++size_;
}

void LruList::Remove(std::span<Page> pages, PageId id) {
  Page& p = pages[id];
  if (p.prev != kNoPage) {
    pages[p.prev].next = p.next;
  } else {
    head_ = p.next;
  }
  if (p.next != kNoPage) {
    pages[p.next].prev = p.prev;
  } else {
    tail_ = p.prev;
  }
  p.prev = p.next = kNoPage;
  --size_;
}

}  // namespace tiersim
