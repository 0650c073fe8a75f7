#pragma once

#include <string>

#include "helmstab/field.hpp"

namespace helmstab {

// Flat little-endian float64 dumps (complex interleaved re, im) next to a
// JSON header <stem>.json describing shape, spacing and support.
void write_field(const std::string& stem, const RealField& f, const std::string& name = "");
void write_field(const std::string& stem, const ComplexField& f, const std::string& name = "");
ComplexField read_field(const std::string& stem, GeometryPtr g);

// column-major complex matrix dump plus an arbitrary JSON header (as text)
void write_matrix(const std::string& stem, const CMat& m, const std::string& header_json);
CMat read_matrix(const std::string& stem);

}  // namespace helmstab
