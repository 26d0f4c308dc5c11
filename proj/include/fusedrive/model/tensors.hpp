#pragma once

#include <vector>

#include <torch/torch.h>

#include "fusedrive/common/image.hpp"
#include "fusedrive/control/types.hpp"
#include "fusedrive/geometry/depth.hpp"
#include "fusedrive/geometry/sdc.hpp"

namespace fusedrive::model {

// H x W x 3 bytes -> 3 x H x W float in [0, 1].
torch::Tensor image_to_tensor(const Image8& img);
// Planar depth in meters, H x W.
torch::Tensor depth_to_tensor(const geometry::DepthMap& depth);
// Class-index map -> num_classes x H x W one-hot.
torch::Tensor one_hot_classes(const geometry::ClassMap& seg, int num_classes);
torch::Tensor sdc_to_tensor(const geometry::SdcGrid& grid);
torch::Tensor measurement_to_tensor(const control::MeasurementVector& m);

geometry::ClassMap tensor_to_class_map(const torch::Tensor& classes);  // H x W integer
geometry::DepthMap tensor_to_depth(const torch::Tensor& depth);
geometry::SdcGrid tensor_to_sdc(const torch::Tensor& sdc);

}  // namespace fusedrive::model
