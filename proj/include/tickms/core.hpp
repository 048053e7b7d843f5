#pragma once
// Shared vocabulary for coupled spread / mid-price dynamics of a large-tick
// asset in transaction time. Spreads live on {1, 2} ticks, mid-price returns
// on {-2, ..., 2} half-ticks, and each consecutive spread pair is encoded as
// one of four transition states that acts as the switching regime.

#include <array>
#include <stdexcept>
#include <string>

namespace tickms {

// Thrown when a return is outside the support allowed by its transition state.
class SupportViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Spread in whole ticks, restricted to {1, 2}.
class SpreadState {
 public:
  explicit SpreadState(int ticks) : ticks_(ticks) {
    if (ticks != 1 && ticks != 2) {
      throw std::invalid_argument("SpreadState: spread must be 1 or 2 ticks, got " +
                                  std::to_string(ticks));
    }
  }
  [[nodiscard]] int ticks() const { return ticks_; }
  friend bool operator==(SpreadState a, SpreadState b) { return a.ticks_ == b.ticks_; }

 private:
  int ticks_;
};

// Encoding of a consecutive spread pair (s(t), s(t+1)):
//   (1,1) -> 1,  (1,2) -> 2,  (2,1) -> 3,  (2,2) -> 4.
// States 1 and 4 keep the spread constant; 2 and 3 change it.
class TransitionState {
 public:
  explicit TransitionState(int value) : value_(value) {
    if (value < 1 || value > 4) {
      throw std::invalid_argument("TransitionState: value must be in 1..4, got " +
                                  std::to_string(value));
    }
  }
  [[nodiscard]] int value() const { return value_; }
  [[nodiscard]] bool spread_constant() const { return value_ == 1 || value_ == 4; }
  friend bool operator==(TransitionState a, TransitionState b) { return a.value_ == b.value_; }

 private:
  int value_;
};

// Mid-price return in half-ticks, restricted to {-2, -1, 0, 1, 2}.
class Return {
 public:
  explicit Return(int half_ticks) : half_ticks_(half_ticks) {
    if (half_ticks < -2 || half_ticks > 2) {
      throw std::invalid_argument("Return: value must be in -2..2 half-ticks, got " +
                                  std::to_string(half_ticks));
    }
  }
  [[nodiscard]] int half_ticks() const { return half_ticks_; }
  friend bool operator==(Return a, Return b) { return a.half_ticks_ == b.half_ticks_; }

 private:
  int half_ticks_;
};

// Binarized price move: 1 = the price moved (or moved up, in the odd regimes),
// 0 = it stayed (or moved down). The regime decides which reading applies.
class BinaryMove {
 public:
  explicit BinaryMove(int value) : value_(value) {
    if (value != 0 && value != 1) {
      throw std::invalid_argument("BinaryMove: value must be 0 or 1");
    }
  }
  [[nodiscard]] int value() const { return value_; }
  friend bool operator==(BinaryMove a, BinaryMove b) { return a.value_ == b.value_; }

 private:
  int value_;
};

// Maps a consecutive spread pair to its transition state.
TransitionState encode_transition(SpreadState prev, SpreadState next);

// Returns reachable under a given transition state: {-2, 0, 2} when the
// spread is constant, {-1, 1} when it changes. The unused tail of the array
// is absent by construction (span-like view over a static table).
struct ReturnSupport {
  std::array<int, 3> values;
  int count;
  [[nodiscard]] const int* begin() const { return values.data(); }
  [[nodiscard]] const int* end() const { return values.data() + count; }
  [[nodiscard]] bool contains(int r) const;
};
ReturnSupport allowed_returns(TransitionState x);

// Collapses a return to the binary move used by the logit stage:
//   constant-spread regimes: |r| = 2 -> 1, r = 0 -> 0;
//   spread-change regimes:   r = +1 -> 1, r = -1 -> 0.
// Throws SupportViolation if r is not reachable under x.
BinaryMove binarize_return(Return r, TransitionState x);

}  // namespace tickms
