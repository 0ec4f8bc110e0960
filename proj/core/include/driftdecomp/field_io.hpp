#pragma once

#include <string>
#include <variant>

#include "driftdecomp/grid.hpp"

namespace driftdecomp {

// Field file: a `DRIFTDECOMP-FIELD v1` line, a `xmin xmax ymin ymax nx ny ncomp`
// line, then row-major little-endian float64 values with components
// interleaved per node.

std::string encode_field(const ScalarField& field);
std::string encode_field(const VectorField& field);
std::variant<ScalarField, VectorField> decode_field(const std::string& bytes);

void save_field(const ScalarField& field, const std::string& path);
void save_field(const VectorField& field, const std::string& path);
ScalarField load_scalar_field(const std::string& path);
VectorField load_vector_field(const std::string& path);

}  // namespace driftdecomp
