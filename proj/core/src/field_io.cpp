#include "driftdecomp/field_io.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include "binary_io.hpp"
#include "driftdecomp/error.hpp"

namespace driftdecomp {

namespace detail {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::IoError, "read failed for '" + path + "'");
  return bytes;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

}  // namespace detail

namespace {

constexpr std::string_view kFieldMagic = "DRIFTDECOMP-FIELD v1";

std::string header(const Grid2D& g, int ncomp) {
  using detail::exact;
  std::string h(kFieldMagic);
  h += '\n';
  h += exact(g.xmin()) + ' ' + exact(g.xmax()) + ' ' + exact(g.ymin()) + ' ' + exact(g.ymax()) + ' ' +
       std::to_string(g.nx()) + ' ' + std::to_string(g.ny()) + ' ' + std::to_string(ncomp) + '\n';
  return h;
}

}  // namespace

std::string encode_field(const ScalarField& field) {
  std::string out = header(field.grid(), 1);
  detail::append_doubles(out, field.values());
  return out;
}

std::string encode_field(const VectorField& field) {
  std::string out = header(field.grid(), 2);
  std::vector<double> interleaved(2 * field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    interleaved[2 * i] = field.ux()[i];
    interleaved[2 * i + 1] = field.uy()[i];
  }
  detail::append_doubles(out, interleaved);
  return out;
}

std::variant<ScalarField, VectorField> decode_field(const std::string& bytes) {
  const auto first_nl = bytes.find('\n');
  if (first_nl == std::string::npos || std::string_view(bytes).substr(0, first_nl) != kFieldMagic) {
    throw Error(ErrorKind::FormatVersionMismatch, "missing DRIFTDECOMP-FIELD v1 header");
  }
  const auto second_nl = bytes.find('\n', first_nl + 1);
  if (second_nl == std::string::npos) throw Error(ErrorKind::FormatVersionMismatch, "truncated field header");

  std::istringstream meta(bytes.substr(first_nl + 1, second_nl - first_nl - 1));
  std::string sx0, sx1, sy0, sy1;
  int nx = 0, ny = 0, ncomp = 0;
  if (!(meta >> sx0 >> sx1 >> sy0 >> sy1 >> nx >> ny >> ncomp) || (ncomp != 1 && ncomp != 2)) {
    throw Error(ErrorKind::FormatVersionMismatch, "malformed field geometry line");
  }
  const Grid2D grid(std::stod(sx0), std::stod(sx1), std::stod(sy0), std::stod(sy1), nx, ny);

  const std::size_t count = grid.size() * static_cast<std::size_t>(ncomp);
  const std::size_t payload = bytes.size() - second_nl - 1;
  if (payload != 8 * count) {
    throw Error(ErrorKind::FormatVersionMismatch,
                "field payload has " + std::to_string(payload) + " bytes, expected " + std::to_string(8 * count));
  }
  std::vector<double> values(count);
  detail::load_doubles(bytes.data() + second_nl + 1, values);
  if (ncomp == 1) return ScalarField(grid, std::move(values));

  std::vector<double> ux(grid.size()), uy(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ux[i] = values[2 * i];
    uy[i] = values[2 * i + 1];
  }
  return VectorField(grid, std::move(ux), std::move(uy));
}

void save_field(const ScalarField& field, const std::string& path) { detail::write_file(path, encode_field(field)); }
void save_field(const VectorField& field, const std::string& path) { detail::write_file(path, encode_field(field)); }

ScalarField load_scalar_field(const std::string& path) {
  auto decoded = decode_field(detail::read_file(path));
  if (auto* s = std::get_if<ScalarField>(&decoded)) return std::move(*s);
  throw Error(ErrorKind::DimensionMismatch, "'" + path + "' holds a vector field");
}

VectorField load_vector_field(const std::string& path) {
  auto decoded = decode_field(detail::read_file(path));
  if (auto* v = std::get_if<VectorField>(&decoded)) return std::move(*v);
  throw Error(ErrorKind::DimensionMismatch, "'" + path + "' holds a scalar field");
}

}  // namespace driftdecomp
