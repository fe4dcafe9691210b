#pragma once

#include <string>
#include <vector>

#include "partrep/core/image.hpp"

namespace partrep::forge {

// Big-endian IDX readers. Image files carry magic 0x00000803 and dims
// (N, rows, cols); label files carry 0x00000801 and (N).

std::vector<GrayImage> load_idx_images(const std::string& path);
std::vector<int> load_idx_labels(const std::string& path);

/// Loads and pairs the two files; throws if the counts differ.
std::vector<GrayImage> load_idx_pair(const std::string& images_path,
                                     const std::string& labels_path);

}  // namespace partrep::forge
