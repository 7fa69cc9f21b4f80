#pragma once

#include <string>

#include "nakano/grid.hpp"

namespace nakano {

/// Sampled-field files carry one compact JSON header line
///   {"kind", "n", "r", "mins", "maxs", "points", "dtype": "f64",
///    "order": "row-major, last axis fastest, matrix entries row-major innermost"}
/// followed by a newline and the little-endian float64 payload. Readers
/// validate the payload length exactly. One-forms store their n components
/// one after another, each in section layout.

void write_field(const std::string& path, const ScalarField& f);
void write_field(const std::string& path, const SectionField& f);
void write_field(const std::string& path, const MatrixField& f);
void write_field(const std::string& path, const OneForm& f);

ScalarField read_scalar_field(const std::string& path);
SectionField read_section_field(const std::string& path);
MatrixField read_matrix_field(const std::string& path);
OneForm read_one_form(const std::string& path);

/// Peeks at the header's kind string without reading the payload.
std::string peek_field_kind(const std::string& path);

}  // namespace nakano
