#include "mlgeom/tensor_io.hpp"

#include <fstream>
#include <stdexcept>

namespace mlgeom {

nlohmann::json tensor_to_json(const DenseTensor& t) {
  nlohmann::json j;
  j["shape"] = t.shape().dims();
  auto& data = j["data"] = nlohmann::json::array();
  for (Index i = 0; i < t.size(); ++i)
    data.push_back(t.data()[i]);
  return j;
}

DenseTensor tensor_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("data"))
    throw DimensionError("tensor JSON needs \"shape\" and \"data\" fields");
  const auto& js = j.at("shape");
  const auto& jd = j.at("data");
  if (!js.is_array() || !jd.is_array())
    throw DimensionError("tensor JSON \"shape\" and \"data\" must be arrays");
  std::vector<Index> dims;
  for (const auto& n : js) {
    if (!n.is_number_integer())
      throw DimensionError("tensor JSON shape entries must be integers");
    dims.push_back(n.get<Index>());
  }
  Shape shape(std::move(dims));
  if (static_cast<Index>(jd.size()) != shape.numel())
    throw DimensionError("tensor JSON data has " + std::to_string(jd.size()) + " entries, shape " +
                         shape.to_string() + " needs " + std::to_string(shape.numel()));
  DenseTensor t(shape);
  Index i = 0;
  for (const auto& x : jd) {
    if (!x.is_number())
      throw std::invalid_argument("tensor JSON data entries must be numbers");
    t.data()[i++] = x.get<double>();
  }
  if (!t.all_finite())
    throw std::invalid_argument("tensor JSON data must be finite");
  return t;
}

DenseTensor read_tensor_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return tensor_from_json(j);
}

void write_tensor_file(const std::string& path, const DenseTensor& t) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  out << tensor_to_json(t).dump() << '\n';
}

} // namespace mlgeom
