#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "mlgeom/tensor.hpp"

namespace mlgeom {

/// {"shape":[n1,...,nd],"data":[...]} with the last index varying fastest.
nlohmann::json tensor_to_json(const DenseTensor& t);

/// Throws DimensionError on a missing field, bad shape or data length mismatch,
/// std::invalid_argument on non-numeric or non-finite entries.
DenseTensor tensor_from_json(const nlohmann::json& j);

DenseTensor read_tensor_file(const std::string& path);
void write_tensor_file(const std::string& path, const DenseTensor& t);

} // namespace mlgeom
