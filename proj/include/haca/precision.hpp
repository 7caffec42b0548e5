// Copyright 2026 The haca Authors. Apache 2.0 License.
//
// Scalar type of the tensor engine. The default build is binary64. Defining
// HACA_EXTENDED_PRECISION compiles the same engine sources over long double
// inside a distinct inline namespace, so both builds can link into one
// program.

#pragma once

#ifdef HACA_EXTENDED_PRECISION
#define HACA_PRECISION_NS extended
#else
#define HACA_PRECISION_NS binary64
#endif

namespace haca::inline HACA_PRECISION_NS {

#ifdef HACA_EXTENDED_PRECISION
using real = long double;
#else
using real = double;
#endif

}  // namespace haca
