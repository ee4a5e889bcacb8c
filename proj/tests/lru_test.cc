#include <doctest.h>

#include <vector>

#include "tiersim/lru.h"

using namespace tiersim;

namespace {

std::vector<PageId> Walk(const LruList& l, const std::vector<Page>& pages) {
  std::vector<PageId> out;
  for (PageId id = l.head(); id != kNoPage; id = pages[id].next) out.push_back(id);
  return out;
}

}  // namespace

TEST_CASE("push head and tail keep order") {
  std::vector<Page> pages(4);
  LruList l;
  l.PushHead(pages, 1);
  l.PushHead(pages, 2);
  l.PushTail(pages, 3);
  CHECK(Walk(l, pages) == std::vector<PageId>{2, 1, 3});
  CHECK(l.head() == 2);
  CHECK(l.tail() == 3);
  CHECK(l.size() == 3);
}

TEST_CASE("remove from middle, head and tail") {
  std::vector<Page> pages(5);
  LruList l;
  for (PageId i = 0; i < 5; ++i) l.PushTail(pages, i);
  l.Remove(pages, 2);
  CHECK(Walk(l, pages) == std::vector<PageId>{0, 1, 3, 4});
  l.Remove(pages, 0);
  l.Remove(pages, 4);
  CHECK(Walk(l, pages) == std::vector<PageId>{1, 3});
  CHECK(l.head() == 1);
  CHECK(l.tail() == 3);
  l.Remove(pages, 1);
  l.Remove(pages, 3);
  CHECK(l.empty());
  CHECK(l.head() == kNoPage);
  CHECK(l.tail() == kNoPage);
}
