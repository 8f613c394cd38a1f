#pragma once
#include <complex>
#include <numbers>

namespace conezeta {

using cplx = std::complex<double>;

inline constexpr double euler_gamma = std::numbers::egamma;
// gamma_tilde = log 2 - gamma, the constant that keeps showing up in the
// log-branch bookkeeping for the q0 block.
inline constexpr double gamma_tilde = std::numbers::ln2 - std::numbers::egamma;

} // namespace conezeta
