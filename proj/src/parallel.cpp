#include "hiernet/parallel.hpp"

namespace hiernet {

namespace {
std::atomic<Index> g_max_threads{1};
}

void set_max_threads(Index n) { g_max_threads.store(n < 1 ? 1 : n); }

Index max_threads() { return g_max_threads.load(); }

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace hiernet
