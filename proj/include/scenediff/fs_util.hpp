#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <opencv2/core.hpp>

namespace scenediff {

// Writes to a sibling temp file and renames it into place, so readers never
// see a partial file. Parent directories are created.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

// PNG-encodes a BGR or single-channel raster, then writes atomically.
void write_png_atomic(const std::filesystem::path& path, const cv::Mat& image);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace scenediff
