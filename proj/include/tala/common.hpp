#pragma once

// Floating-point precision is chosen at build time. The default build uses
// 32-bit floats; defining TALA_F64 switches every tensor to 64-bit, which is
// only used for finite-difference gradient checks. Each variant lives in its
// own inline namespace so the two libraries can coexist in one executable.

#ifdef TALA_F64
#define TALA_ABI_NAMESPACE f64
#else
#define TALA_ABI_NAMESPACE f32
#endif

#define TALA_NAMESPACE_BEGIN \
  namespace tala {           \
  inline namespace TALA_ABI_NAMESPACE {
#define TALA_NAMESPACE_END \
  }                        \
  }

TALA_NAMESPACE_BEGIN

#ifdef TALA_F64
using Real = double;
#else
using Real = float;
#endif

inline constexpr const char* kVersion = "0.1.0";

TALA_NAMESPACE_END
