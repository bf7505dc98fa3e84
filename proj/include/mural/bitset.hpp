#pragma once
// Fixed-universe bit set backing point regions and hypothesis version
// spaces.  Universes stay small (hundreds of points, hundreds of
// hypotheses), so a flat word array with explicit tail masking is both the
// simplest and the fastest structure for the set algebra the learners do.

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace mural {

class IndexSet {
 public:
  IndexSet() = default;

  explicit IndexSet(std::size_t universe, bool filled = false)
      : n_(universe), w_((universe + 63) / 64, 0) {
    if (filled) fill();
  }

  static IndexSet full(std::size_t universe) { return IndexSet(universe, true); }

  std::size_t universe() const { return n_; }

  bool test(std::size_t i) const {
    assert(i < n_);
    return (w_[i >> 6] >> (i & 63)) & 1u;
  }

  void set(std::size_t i) {
    assert(i < n_);
    w_[i >> 6] |= std::uint64_t(1) << (i & 63);
  }

  void reset(std::size_t i) {
    assert(i < n_);
    w_[i >> 6] &= ~(std::uint64_t(1) << (i & 63));
  }

  void fill() {
    for (auto& w : w_) w = ~std::uint64_t(0);
    mask_tail();
  }

  void clear() {
    for (auto& w : w_) w = 0;
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : w_) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
  }

  bool any() const {
    for (auto w : w_)
      if (w) return true;
    return false;
  }

  bool none() const { return !any(); }

  IndexSet operator&(const IndexSet& o) const {
    IndexSet r = prepare(o);
    for (std::size_t k = 0; k < w_.size(); ++k) r.w_[k] = w_[k] & o.w_[k];
    return r;
  }

  IndexSet operator|(const IndexSet& o) const {
    IndexSet r = prepare(o);
    for (std::size_t k = 0; k < w_.size(); ++k) r.w_[k] = w_[k] | o.w_[k];
    return r;
  }

  // this \ o
  IndexSet and_not(const IndexSet& o) const {
    IndexSet r = prepare(o);
    for (std::size_t k = 0; k < w_.size(); ++k) r.w_[k] = w_[k] & ~o.w_[k];
    return r;
  }

  IndexSet complement() const {
    IndexSet r(n_);
    for (std::size_t k = 0; k < w_.size(); ++k) r.w_[k] = ~w_[k];
    r.mask_tail();
    return r;
  }

  bool is_subset_of(const IndexSet& o) const {
    assert(n_ == o.n_);
    for (std::size_t k = 0; k < w_.size(); ++k)
      if (w_[k] & ~o.w_[k]) return false;
    return true;
  }

  bool operator==(const IndexSet& o) const { return n_ == o.n_ && w_ == o.w_; }
  bool operator!=(const IndexSet& o) const { return !(*this == o); }

  template <class F>
  void for_each(F f) const {
    for (std::size_t k = 0; k < w_.size(); ++k) {
      std::uint64_t w = w_[k];
      while (w) {
        const unsigned b = static_cast<unsigned>(__builtin_ctzll(w));
        f(k * 64 + b);
        w &= w - 1;
      }
    }
  }

  std::vector<std::size_t> to_indices() const {
    std::vector<std::size_t> out;
    out.reserve(count());
    for_each([&](std::size_t i) { out.push_back(i); });
    return out;
  }

 private:
  IndexSet prepare(const IndexSet& o) const {
    assert(n_ == o.n_);
    (void)o;
    return IndexSet(n_);
  }

  void mask_tail() {
    if (n_ % 64 != 0 && !w_.empty())
      w_.back() &= (std::uint64_t(1) << (n_ % 64)) - 1;
  }

  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

}  // namespace mural
