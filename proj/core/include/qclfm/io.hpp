#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qclfm/detector.hpp"
#include "qclfm/field.hpp"

namespace qclfm::io {

// Binary formats, all little-endian:
//   FLD1  "FLD1", u32 width, u32 height, f64 pitch_um, f64 lambda_um,
//         width*height records of (f32 re, f32 im), row-major (y-major).
//   EVT1  "EVT1", u32 count, records of
//         (u8 cam, f32 x_px, f32 y_px, u64 t_ns, u16 cluster_size).
//   RAW1  "RAW1", u32 count, records of (u8 cam, u16 x, u16 y, u64 t_ns, f32 amplitude).
//   DPT1  FLD1 header scheme with magic "DPT1", then one f32 per pixel,
//         NaN marking masked pixels.

void write_fld1(const std::filesystem::path& path, const ComplexField& field);
ComplexField read_fld1(const std::filesystem::path& path);

void write_evt1(const std::filesystem::path& path, std::span<const DetectionEvent> events);
std::vector<DetectionEvent> read_evt1(const std::filesystem::path& path);

void write_raw1(const std::filesystem::path& path, std::span<const RawPixelHit> hits);
std::vector<RawPixelHit> read_raw1(const std::filesystem::path& path);

void write_dpt1(const std::filesystem::path& path, int width, int height, double pitch_um,
                double lambda_um, std::span<const float> values);
struct DepthRaster {
  int width = 0;
  int height = 0;
  double pitch_um = 0.0;
  double lambda_um = 0.0;
  std::vector<float> values;
};
DepthRaster read_dpt1(const std::filesystem::path& path);

/// 8-bit binary PGM preview, values min-max normalized (NaN rendered as 0).
void write_pgm(const std::filesystem::path& path, int width, int height,
               std::span<const double> values);
/// Color preview: hue encodes value over [lo, hi], NaN rendered black.
void write_ppm_colormap(const std::filesystem::path& path, int width, int height,
                        std::span<const float> values, float lo, float hi);

/// CSV writing with a fixed header; every row must match the column count.
void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::vector<double>>& rows);

/// Writes content to a temp file in the target directory and renames it over
/// the destination, so partially written outputs are never observed.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace qclfm::io
