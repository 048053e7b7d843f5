#include "tickms/core.hpp"

namespace tickms {

TransitionState encode_transition(SpreadState prev, SpreadState next) {
  const int code = 2 * (prev.ticks() - 1) + (next.ticks() - 1) + 1;
  return TransitionState(code);
}

bool ReturnSupport::contains(int r) const {
  for (int v : *this) {
    if (v == r) return true;
  }
  return false;
}

ReturnSupport allowed_returns(TransitionState x) {
  if (x.spread_constant()) return ReturnSupport{{-2, 0, 2}, 3};
  return ReturnSupport{{-1, 1, 0}, 2};
}

BinaryMove binarize_return(Return r, TransitionState x) {
  if (!allowed_returns(x).contains(r.half_ticks())) {
    throw SupportViolation("binarize_return: return " + std::to_string(r.half_ticks()) +
                           " not reachable under transition state " +
                           std::to_string(x.value()));
  }
  if (x.spread_constant()) return BinaryMove(r.half_ticks() != 0 ? 1 : 0);
  return BinaryMove(r.half_ticks() > 0 ? 1 : 0);
}

}  // namespace tickms
