#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "amalgam/error.hpp"

namespace amalgam {

using Block = std::vector<std::size_t>;

/// True if some a < b < c < d has a, c in one block and b, d in another.
inline bool has_crossing(const std::vector<Block>& blocks) {
  for (std::size_t v = 0; v < blocks.size(); ++v)
    for (std::size_t w = 0; w < blocks.size(); ++w) {
      if (v == w) continue;
      const Block& x = blocks[v];
      const Block& y = blocks[w];
      for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t k = i + 1; k < x.size(); ++k)
          for (std::size_t j = 0; j < y.size(); ++j) {
            if (!(x[i] < y[j] && y[j] < x[k])) continue;
            for (std::size_t l = 0; l < y.size(); ++l)
              if (y[l] > x[k]) return true;
          }
    }
  return false;
}

/// Non-crossing partition of the legs {0, ..., n-1}.
///
/// Blocks are kept sorted internally and ordered by their smallest leg.
/// A block's parent is the innermost block whose span strictly encloses it.
class NCPartition {
 public:
  NCPartition() = default;

  NCPartition(std::size_t n, std::vector<Block> blocks) : n_(n), blocks_(std::move(blocks)) {
    for (auto& b : blocks_) {
      if (b.empty()) throw Error(ErrorCode::BadPartition, "empty block");
      std::sort(b.begin(), b.end());
    }
    std::sort(blocks_.begin(), blocks_.end(), [](const Block& x, const Block& y) { return x.front() < y.front(); });
    block_of_.assign(n_, n_);
    for (std::size_t v = 0; v < blocks_.size(); ++v)
      for (auto leg : blocks_[v]) {
        if (leg >= n_ || block_of_[leg] != n_) throw Error(ErrorCode::BadPartition, "blocks must partition 0..n-1");
        block_of_[leg] = v;
      }
    if (std::find(block_of_.begin(), block_of_.end(), n_) != block_of_.end()) {
      throw Error(ErrorCode::BadPartition, "blocks do not cover 0..n-1");
    }
    if (has_crossing(blocks_)) throw Error(ErrorCode::BadPartition, "partition is crossing");
    build_nesting();
  }

  static NCPartition full(std::size_t n) {
    Block b(n);
    std::iota(b.begin(), b.end(), std::size_t{0});
    return n == 0 ? NCPartition() : NCPartition(n, {b});
  }

  static NCPartition singletons(std::size_t n) {
    std::vector<Block> bs;
    for (std::size_t i = 0; i < n; ++i) bs.push_back({i});
    return NCPartition(n, std::move(bs));
  }

  std::size_t size() const noexcept { return n_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  std::size_t block_of(std::size_t leg) const { return block_of_.at(leg); }
  std::optional<std::size_t> parent(std::size_t block) const { return parent_.at(block); }
  const std::vector<std::size_t>& children(std::size_t block) const { return children_.at(block); }

  /// First and last legs share a block.
  bool is_irreducible() const { return n_ > 0 && block_of_.front() == block_of_.back(); }

  friend bool operator==(const NCPartition& x, const NCPartition& y) {
    return x.n_ == y.n_ && x.blocks_ == y.blocks_;
  }

 private:
  void build_nesting() {
    parent_.assign(blocks_.size(), std::nullopt);
    children_.assign(blocks_.size(), {});
    for (std::size_t v = 0; v < blocks_.size(); ++v) {
      const auto lo = blocks_[v].front();
      const auto hi = blocks_[v].back();
      std::optional<std::size_t> best;
      for (std::size_t w = 0; w < blocks_.size(); ++w) {
        if (w == v) continue;
        if (blocks_[w].front() < lo && hi < blocks_[w].back()) {
          if (!best || blocks_[w].front() > blocks_[*best].front()) best = w;
        }
      }
      parent_[v] = best;
      if (best) children_[*best].push_back(v);
    }
  }

  std::size_t n_ = 0;
  std::vector<Block> blocks_;
  std::vector<std::size_t> block_of_;
  std::vector<std::optional<std::size_t>> parent_;
  std::vector<std::vector<std::size_t>> children_;
};

inline bool is_irreducible(const NCPartition& p) { return p.is_irreducible(); }

/// p followed by q, with q's legs shifted past p's.
inline NCPartition concat(const NCPartition& p, const NCPartition& q) {
  std::vector<Block> bs = p.blocks();
  for (Block b : q.blocks()) {
    for (auto& leg : b) leg += p.size();
    bs.push_back(std::move(b));
  }
  const std::size_t n = p.size() + q.size();
  return n == 0 ? NCPartition() : NCPartition(n, std::move(bs));
}

namespace detail {

using BlockList = std::vector<Block>;

inline void shift_into(BlockList& dst, const BlockList& src, std::size_t offset) {
  for (Block b : src) {
    for (auto& leg : b) leg += offset;
    dst.push_back(std::move(b));
  }
}

// nc[L] holds NC(L) as raw block lists; irr[L] the irreducible ones.
// Every irreducible partition of {0..L-1}, L >= 2, arises exactly once from
// NC({1..L-1}) by adding leg 0 to the block that holds leg L-1.
inline std::vector<std::vector<BlockList>> nc_tables(std::size_t n) {
  std::vector<std::vector<BlockList>> nc(n + 1);
  std::vector<std::vector<BlockList>> irr(n + 1);
  nc[0] = {BlockList{}};
  for (std::size_t len = 1; len <= n; ++len) {
    if (len == 1) {
      irr[1] = {BlockList{Block{0}}};
    } else {
      for (const auto& inner : nc[len - 1]) {
        BlockList bl;
        shift_into(bl, inner, 1);
        for (auto& b : bl)
          if (b.back() == len - 1) b.insert(b.begin(), 0);
        irr[len].push_back(std::move(bl));
      }
    }
    // The block of leg 0 ends at leg p; legs p+1.. form a free tail.
    for (std::size_t p = 0; p < len; ++p)
      for (const auto& head : irr[p + 1])
        for (const auto& tail : nc[len - 1 - p]) {
          BlockList bl = head;
          shift_into(bl, tail, p + 1);
          nc[len].push_back(std::move(bl));
        }
  }
  return nc;
}

}  // namespace detail

inline constexpr std::size_t kMaxEnumerate = 12;

/// All of NC(n), each exactly once; |NC(n)| is the n-th Catalan number.
inline std::vector<NCPartition> enumerate_nc(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::TooLarge, "enumerate_nc needs n >= 1");
  if (n > kMaxEnumerate) throw Error(ErrorCode::TooLarge, "enumerate_nc is limited to n <= 12");
  auto tables = detail::nc_tables(n);
  std::vector<NCPartition> out;
  out.reserve(tables[n].size());
  for (auto& bl : tables[n]) out.emplace_back(n, std::move(bl));
  return out;
}

/// Ordered parts n_1 + ... + n_j = r, all >= 1.
struct Composition {
  std::vector<std::size_t> parts;

  std::size_t total() const { return std::accumulate(parts.begin(), parts.end(), std::size_t{0}); }
  bool valid() const {
    return !parts.empty() && std::all_of(parts.begin(), parts.end(), [](auto p) { return p >= 1; });
  }
  friend bool operator==(const Composition&, const Composition&) = default;
};

/// All 2^{r-1} compositions of r.
inline std::vector<Composition> compositions(std::size_t r) {
  std::vector<Composition> out;
  if (r == 0) return out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << (r - 1)); ++mask) {
    Composition c;
    std::size_t run = 1;
    for (std::size_t i = 0; i + 1 < r; ++i) {
      if (mask & (std::size_t{1} << i)) {
        c.parts.push_back(run);
        run = 1;
      } else {
        ++run;
      }
    }
    c.parts.push_back(run);
    out.push_back(std::move(c));
  }
  return out;
}

/// Every pi in NC(r) with pi <= 1_{n_1} concat ... concat 1_{n_j}.
inline std::vector<NCPartition> interval_refinements(std::size_t r, const Composition& c) {
  if (!c.valid() || c.total() != r) throw Error(ErrorCode::BadComposition, "parts must be >= 1 and sum to r");
  if (r > kMaxEnumerate) throw Error(ErrorCode::TooLarge, "interval_refinements is limited to r <= 12");
  const std::size_t largest = *std::max_element(c.parts.begin(), c.parts.end());
  const auto tables = detail::nc_tables(largest);
  std::vector<detail::BlockList> acc = {detail::BlockList{}};
  std::size_t offset = 0;
  for (auto part : c.parts) {
    std::vector<detail::BlockList> next;
    next.reserve(acc.size() * tables[part].size());
    for (const auto& prefix : acc)
      for (const auto& piece : tables[part]) {
        auto bl = prefix;
        detail::shift_into(bl, piece, offset);
        next.push_back(std::move(bl));
      }
    acc = std::move(next);
    offset += part;
  }
  std::vector<NCPartition> out;
  out.reserve(acc.size());
  for (auto& bl : acc) out.emplace_back(r, std::move(bl));
  return out;
}

}  // namespace amalgam
