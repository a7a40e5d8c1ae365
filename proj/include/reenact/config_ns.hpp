#pragma once

// The numeric core is compiled twice: a 32-bit build used for training and
// inference, and a 64-bit build used by the finite-difference gradient checks.
// Each build lives in its own inline namespace so both can be linked into one
// binary.

#ifdef REENACT_REAL_DOUBLE
#define REENACT_NS_BEGIN \
  namespace reenact {    \
  inline namespace f64 {
#define REENACT_NS_END \
  }                    \
  }
#else
#define REENACT_NS_BEGIN \
  namespace reenact {    \
  inline namespace f32 {
#define REENACT_NS_END \
  }                    \
  }
#endif

REENACT_NS_BEGIN
#ifdef REENACT_REAL_DOUBLE
using Real = double;
#else
using Real = float;
#endif
REENACT_NS_END
