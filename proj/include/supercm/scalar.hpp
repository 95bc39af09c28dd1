#pragma once

namespace supercm {

// Default scalar is 64-bit. Building with -DSUPERCM_FLOAT32 switches the whole
// library to 32-bit for speed; the gradient-check and acceptance suites require
// the 64-bit build and guard against the float build with a static_assert.
#ifdef SUPERCM_FLOAT32
using real = float;
#else
using real = double;
#endif

// Lower clamp applied to every log argument (cross-entropy, KL, Dirichlet
// term). Single shared constant so the loss values and their gradients use
// the same cutoff.
inline constexpr real kLogClamp = static_cast<real>(1e-12);

}  // namespace supercm
