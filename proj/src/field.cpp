#include "voxrf/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace voxrf {
namespace {

constexpr char kMagic[4] = {'V', 'X', 'R', 'F'};
constexpr uint32_t kVersion = 1;
constexpr std::size_t kActName = 16;

void put_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<char*>(b), 4);
}

uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<char*>(b), 8);
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void put_name(std::ostream& out, const char* name) {
  char buf[kActName] = {};
  std::strncpy(buf, name, kActName - 1);
  out.write(buf, kActName);
}

std::string get_name(std::istream& in) {
  char buf[kActName];
  in.read(buf, kActName);
  buf[kActName - 1] = '\0';
  return buf;
}

void put_f32_block(std::ostream& out, const std::vector<double>& v) {
  std::vector<float> tmp(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) tmp[i] = static_cast<float>(v[i]);
  static_assert(sizeof(float) == 4);
  out.write(reinterpret_cast<const char*>(tmp.data()),
            static_cast<std::streamsize>(tmp.size() * 4));
}

void get_f32_block(std::istream& in, std::vector<double>& v, const std::string& path) {
  std::vector<float> tmp(v.size());
  in.read(reinterpret_cast<char*>(tmp.data()), static_cast<std::streamsize>(tmp.size() * 4));
  if (!in) throw IoError(path + ": truncated checkpoint payload");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(tmp[i])) throw ValidationError(path + ": checkpoint holds non-finite parameters");
    v[i] = tmp[i];
  }
}

}  // namespace

VoxelRadianceField::VoxelRadianceField(int nx, int ny, int nz, const Aabb& bounds)
    : nx_(nx), ny_(ny), nz_(nz), bounds_(bounds) {
  if (nx < 2 || ny < 2 || nz < 2)
    throw ValidationError("field resolution must be at least 2 per axis");
  bounds.validate();
  Vec3 e = bounds.extent();
  inv_h_ = {(nx - 1) / e.x, (ny - 1) / e.y, (nz - 1) / e.z};
  std::size_t n = static_cast<std::size_t>(nx) * ny * nz;
  raw_density_.assign(n, 0.0);
  raw_color_.assign(n * 3, 0.0);
}

VoxelRadianceField VoxelRadianceField::init_field(int nx, int ny, int nz, const Aabb& bounds,
                                                  double initial_sigma) {
  VoxelRadianceField f(nx, ny, nz, bounds);
  double raw = softplus_inverse(initial_sigma);
  std::fill(f.raw_density_.begin(), f.raw_density_.end(), raw);
  // raw color 0 activates to 0.5
  return f;
}

double VoxelRadianceField::vertex_spacing() const {
  Vec3 e = bounds_.extent();
  return std::max({e.x / (nx_ - 1), e.y / (ny_ - 1), e.z / (nz_ - 1)});
}

void VoxelRadianceField::inject_floater(const Vec3& center, double radius, double sigma,
                                        const Vec3& color) {
  if (!(radius > 0)) throw ValidationError("floater radius must be positive");
  if (!(sigma > 0)) throw ValidationError("floater density must be positive");
  double raw_d = softplus_inverse(sigma);
  Vec3 raw_c;
  for (int c = 0; c < 3; ++c) {
    if (!(color[c] >= 0.0 && color[c] <= 1.0))
      throw ValidationError("floater color channels must be in [0, 1]");
    double v = std::clamp(color[c], 1e-6, 1.0 - 1e-6);
    raw_c[c] = std::log(v / (1.0 - v));
  }
  Vec3 e = bounds_.extent();
  double r2 = radius * radius;
  bool touched = false;
  for (int k = 0; k < nz_; ++k)
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i) {
        Vec3 v{bounds_.lo.x + e.x * i / (nx_ - 1), bounds_.lo.y + e.y * j / (ny_ - 1),
               bounds_.lo.z + e.z * k / (nz_ - 1)};
        Vec3 d = v - center;
        if (dot(d, d) > r2) continue;
        std::size_t idx = (static_cast<std::size_t>(k) * ny_ + j) * nx_ + i;
        raw_density_[idx] = raw_d;
        for (int c = 0; c < 3; ++c) raw_color_[idx * 3 + c] = raw_c[c];
        touched = true;
      }
  if (!touched)
    throw ValidationError("floater ball covers no grid vertex; enlarge it or move it inside");
}

void VoxelRadianceField::save_checkpoint(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<uint32_t>(nx_));
  put_u32(out, static_cast<uint32_t>(ny_));
  put_u32(out, static_cast<uint32_t>(nz_));
  for (int a = 0; a < 3; ++a) put_f64(out, bounds_.lo[a]);
  for (int a = 0; a < 3; ++a) put_f64(out, bounds_.hi[a]);
  put_name(out, "softplus");
  put_name(out, "sigmoid");
  put_f32_block(out, raw_density_);
  put_f32_block(out, raw_color_);
  if (!out) throw IoError("short write on " + path);
}

VoxelRadianceField VoxelRadianceField::load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError(path + " is not a field checkpoint");
  uint32_t version = get_u32(in);
  if (version != kVersion)
    throw IoError(path + ": unsupported checkpoint version " + std::to_string(version));
  uint32_t nx = get_u32(in), ny = get_u32(in), nz = get_u32(in);
  Aabb bounds;
  for (int a = 0; a < 3; ++a) bounds.lo[a] = get_f64(in);
  for (int a = 0; a < 3; ++a) bounds.hi[a] = get_f64(in);
  std::string act_d = get_name(in), act_c = get_name(in);
  if (!in) throw IoError(path + ": truncated checkpoint header");
  if (act_d != "softplus" || act_c != "sigmoid")
    throw ValidationError(path + ": unknown activations '" + act_d + "'/'" + act_c + "'");
  if (nx < 2 || ny < 2 || nz < 2 || nx > 4096 || ny > 4096 || nz > 4096)
    throw ValidationError(path + ": implausible grid resolution");
  VoxelRadianceField f(static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nz), bounds);
  get_f32_block(in, f.raw_density_, path);
  get_f32_block(in, f.raw_color_, path);
  return f;
}

}  // namespace voxrf
