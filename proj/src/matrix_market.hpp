// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "linalg.hpp"

namespace igm::mm {

/// Reads a Matrix Market file (coordinate real, general or symmetric).
/// Parse failures report the offending file and line number.
SparseMat read_matrix(const std::string& path);

/// Reads a dense vector stored in Matrix Market array format (or an n-by-1
/// coordinate file).
Vec read_vector(const std::string& path);

void write_matrix(const std::string& path, const SparseMat& a);
void write_vector(const std::string& path, const Vec& v);

}  // namespace igm::mm
