#pragma once

#include "mfhb/rng.hpp"
#include "mfhb/types.hpp"

namespace mfhb {

// Batched math for the hot particle loops. Compiled in a separate translation
// unit with vector-math flags; everything else stays strict IEEE.

// s[j] = act(z[j]) for j < n.
void activation_row(ActivationKind kind, const double* z, double* s, int n);

// n standard normals from the stream: uniform draws stay on the exact integer
// path, the Box-Muller transform runs through the vector math library.
void normal_row(RngStream& stream, double* out, int n);

}  // namespace mfhb
