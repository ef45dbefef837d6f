#pragma once

// File formats for tensors and matrices.
//
// Binary container (all integers and floats little-endian):
//
//   bytes 0..3    magic "RCPD"
//   u32           format version (1)
//   u32           number of dimensions: 3 for a tensor, 2 for a matrix
//   u32           reserved, zero
//   u64 x ndims   dimensions (I, J, K) or (rows, cols)
//   f64 x prod    payload: tensor in the Tensor3 storage order (i fastest),
//                 matrix in column-major order
//
// CSV interchange: header "i,j,k,value" (tensor) or "i,j,value" (matrix),
// zero-based indices, one entry per line. Entries that are not listed are
// zero. Writers emit a leading "# dims: ..." comment line so that trailing
// all-zero slabs survive a round trip; readers without it infer each
// dimension as the largest index plus one.

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "rcpd/tensor.hpp"

namespace rcpd::io {

inline constexpr std::uint32_t kFormatVersion = 1;

void write_tensor_binary(std::ostream& os, const Tensor3& t);
Tensor3 read_tensor_binary(std::istream& is);
void write_matrix_binary(std::ostream& os, const Matrix& m);
Matrix read_matrix_binary(std::istream& is);

void write_tensor_csv(std::ostream& os, const Tensor3& t);
Tensor3 read_tensor_csv(std::istream& is);
void write_matrix_csv(std::ostream& os, const Matrix& m);
Matrix read_matrix_csv(std::istream& is);

// Path-based helpers choose CSV for a ".csv" extension and the binary
// container otherwise.
void save_tensor(const std::filesystem::path& path, const Tensor3& t);
Tensor3 load_tensor(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix(const std::filesystem::path& path);

}  // namespace rcpd::io
