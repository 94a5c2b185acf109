#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "certree/errors.hpp"

namespace certree {

/// Dense fixed-length bit-vector over packed 64-bit words.
///
/// Bits at positions >= size() are always zero in storage, so population
/// counts and equality never need masking.
class BitVector {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  BitVector() = default;

  explicit BitVector(std::size_t length, bool value = false)
      : length_(length), words_(word_count(length), value ? ~Word{0} : Word{0}) {
    clear_padding();
  }

  static BitVector make(std::span<const bool> bits) {
    BitVector v(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i]) v.set(i, true);
    }
    return v;
  }

  static BitVector make(std::initializer_list<int> bits) {
    BitVector v(bits.size());
    std::size_t i = 0;
    for (int b : bits) {
      if (b != 0) v.set(i, true);
      ++i;
    }
    return v;
  }

  static BitVector ones(std::size_t length) { return BitVector(length, true); }
  static BitVector zeros(std::size_t length) { return BitVector(length, false); }

  std::size_t size() const noexcept { return length_; }
  bool empty() const noexcept { return length_ == 0; }
  std::span<const Word> words() const noexcept { return words_; }

  bool test(std::size_t i) const {
    if (i >= length_) throw UsageError("BitVector::test index out of range");
    return (words_[i / kWordBits] >> (i % kWordBits)) & 1U;
  }

  void set(std::size_t i, bool value) {
    if (i >= length_) throw UsageError("BitVector::set index out of range");
    const Word mask = Word{1} << (i % kWordBits);
    if (value) {
      words_[i / kWordBits] |= mask;
    } else {
      words_[i / kWordBits] &= ~mask;
    }
  }

  std::size_t count_ones() const noexcept {
    std::size_t total = 0;
    for (Word w : words_) total += static_cast<std::size_t>(std::popcount(w));
    return total;
  }

  bool any() const noexcept {
    for (Word w : words_) {
      if (w != 0) return true;
    }
    return false;
  }

  // popcount(a & b) without materializing the conjunction.
  static std::size_t count_and(const BitVector& a, const BitVector& b) {
    check_same_length(a, b, "count_and");
    std::size_t total = 0;
    for (std::size_t i = 0; i < a.words_.size(); ++i) {
      total += static_cast<std::size_t>(std::popcount(a.words_[i] & b.words_[i]));
    }
    return total;
  }

  static std::size_t count_xor(const BitVector& a, const BitVector& b) {
    check_same_length(a, b, "count_xor");
    std::size_t total = 0;
    for (std::size_t i = 0; i < a.words_.size(); ++i) {
      total += static_cast<std::size_t>(std::popcount(a.words_[i] ^ b.words_[i]));
    }
    return total;
  }

  friend BitVector operator&(const BitVector& a, const BitVector& b) {
    check_same_length(a, b, "and");
    BitVector out(a.length_);
    for (std::size_t i = 0; i < a.words_.size(); ++i) out.words_[i] = a.words_[i] & b.words_[i];
    return out;
  }

  friend BitVector operator|(const BitVector& a, const BitVector& b) {
    check_same_length(a, b, "or");
    BitVector out(a.length_);
    for (std::size_t i = 0; i < a.words_.size(); ++i) out.words_[i] = a.words_[i] | b.words_[i];
    return out;
  }

  /// a & ~b. Padding stays zero because a's padding is zero.
  static BitVector and_not(const BitVector& a, const BitVector& b) {
    check_same_length(a, b, "and_not");
    BitVector out(a.length_);
    for (std::size_t i = 0; i < a.words_.size(); ++i) out.words_[i] = a.words_[i] & ~b.words_[i];
    return out;
  }

  friend bool operator==(const BitVector& a, const BitVector& b) = default;

  std::string to_string() const {
    std::string s;
    s.reserve(length_);
    for (std::size_t i = 0; i < length_; ++i) s.push_back(test(i) ? '1' : '0');
    return s;
  }

  std::size_t hash() const noexcept {
    std::size_t h = std::hash<std::size_t>{}(length_);
    for (Word w : words_) h ^= std::hash<Word>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }

 private:
  static std::size_t word_count(std::size_t length) { return (length + kWordBits - 1) / kWordBits; }

  static void check_same_length(const BitVector& a, const BitVector& b, const char* op) {
    if (a.length_ != b.length_) {
      throw UsageError(std::string("BitVector ") + op + ": length mismatch (" +
                       std::to_string(a.length_) + " vs " + std::to_string(b.length_) + ")");
    }
  }

  void clear_padding() noexcept {
    const std::size_t tail = length_ % kWordBits;
    if (tail != 0 && !words_.empty()) words_.back() &= (Word{1} << tail) - 1;
  }

  std::size_t length_ = 0;
  std::vector<Word> words_;
};

inline BitVector bit_and(const BitVector& a, const BitVector& b) { return a & b; }
inline BitVector bit_and_not(const BitVector& a, const BitVector& b) { return BitVector::and_not(a, b); }
inline std::size_t count_ones(const BitVector& a) { return a.count_ones(); }

}  // namespace certree
