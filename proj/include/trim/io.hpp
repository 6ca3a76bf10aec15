#ifndef TRIM_IO_HPP
#define TRIM_IO_HPP

#include <string>

#include "trim/forward.hpp"
#include "trim/imaging.hpp"
#include "trim/mesh.hpp"

namespace trim::io {

// Trace files: CSV with a `# kind=...` metadata line, a header row carrying
// the receiver coordinates, then one row per sample: time followed by one
// pressure column per receiver. 17 significant digits throughout.
void write_traces(const std::string& path, const TraceRecord& traces);
TraceRecord read_traces(const std::string& path);

// Movie files: binary, header { "TRIM", version, nx, ny, frames, stride } as
// 64-bit little-endian integers after the 4-byte magic, then dt as a 64-bit
// float, then frame-major f64 planes (u1, u2, div) per frame. The grid
// placement is not part of the header; callers restore it from the scene.
void write_movie(const std::string& path, const FieldMovie& movie);
FieldMovie read_movie(const std::string& path);

// Image files: CSV matrix with one metadata header line (origin, spacing,
// dimensions, variant), and an 8-bit P5 graymap scaled min->0 max->255 with
// a sidecar text file recording the scale.
void write_image_csv(const std::string& path, const ImageField& image);
ImageField read_image_csv(const std::string& path);
void write_image_pgm(const std::string& path, const std::string& sidecar_path,
                     const ImageField& image);

// Plain-text mesh dump, one record per line.
void write_mesh(const std::string& path, const Mesh& mesh);

std::string format_double(double v);  // %.17g

}  // namespace trim::io

#endif
