#include "fusedrive/model/tensors.hpp"

#include <cstring>

#include "fusedrive/common/errors.hpp"

namespace fusedrive::model {

torch::Tensor image_to_tensor(const Image8& img) {
  if (img.channels != 3) throw InvalidInput("image_to_tensor: expected 3 channels");
  auto t = torch::empty({img.height, img.width, 3}, torch::kUInt8);
  std::memcpy(t.data_ptr<std::uint8_t>(), img.data.data(), img.data.size());
  return t.permute({2, 0, 1}).to(torch::kFloat32).div_(255.0).contiguous();
}

torch::Tensor depth_to_tensor(const geometry::DepthMap& depth) {
  auto t = torch::empty({depth.rows(), depth.cols()}, torch::kFloat64);
  auto* p = t.data_ptr<double>();
  for (int r = 0; r < depth.rows(); ++r) {
    for (int c = 0; c < depth.cols(); ++c) *p++ = depth.at(r, c);
  }
  return t;
}

torch::Tensor one_hot_classes(const geometry::ClassMap& seg, int num_classes) {
  auto t = torch::zeros({num_classes, seg.rows(), seg.cols()}, torch::kFloat32);
  auto acc = t.accessor<float, 3>();
  for (int r = 0; r < seg.rows(); ++r) {
    for (int c = 0; c < seg.cols(); ++c) {
      const int k = seg.at(r, c);
      if (k < 0 || k >= num_classes) throw InvalidInput("one_hot_classes: class id out of range");
      acc[k][r][c] = 1.0f;
    }
  }
  return t;
}

torch::Tensor sdc_to_tensor(const geometry::SdcGrid& grid) {
  auto t = torch::empty({grid.channels(), grid.rows(), grid.cols()}, torch::kUInt8);
  std::memcpy(t.data_ptr<std::uint8_t>(), grid.data().data(), grid.data().size());
  return t.to(torch::kFloat32);
}

torch::Tensor measurement_to_tensor(const control::MeasurementVector& m) {
  const auto a = m.to_array();
  auto t = torch::empty({static_cast<int64_t>(a.size())}, torch::kFloat32);
  for (std::size_t i = 0; i < a.size(); ++i) t[static_cast<int64_t>(i)] = static_cast<float>(a[i]);
  return t;
}

geometry::ClassMap tensor_to_class_map(const torch::Tensor& classes) {
  const auto t = classes.to(torch::kInt32).contiguous();
  if (t.dim() != 2) throw InvalidInput("tensor_to_class_map: expected H x W");
  geometry::ClassMap out(static_cast<int>(t.size(0)), static_cast<int>(t.size(1)));
  std::memcpy(out.data().data(), t.data_ptr<std::int32_t>(), sizeof(std::int32_t) * t.numel());
  return out;
}

geometry::DepthMap tensor_to_depth(const torch::Tensor& depth) {
  const auto t = depth.to(torch::kFloat64).contiguous();
  if (t.dim() != 2) throw InvalidInput("tensor_to_depth: expected H x W");
  geometry::DepthMap out(static_cast<int>(t.size(0)), static_cast<int>(t.size(1)));
  std::memcpy(out.data().data(), t.data_ptr<double>(), sizeof(double) * t.numel());
  return out;
}

geometry::SdcGrid tensor_to_sdc(const torch::Tensor& sdc) {
  const auto t = (sdc > 0.5).to(torch::kUInt8).contiguous();
  if (t.dim() != 3) throw InvalidInput("tensor_to_sdc: expected C x H x W");
  geometry::SdcGrid out(static_cast<int>(t.size(0)), static_cast<int>(t.size(1)),
                        static_cast<int>(t.size(2)), 0);
  std::memcpy(out.data().data(), t.data_ptr<std::uint8_t>(), t.numel());
  return out;
}

}  // namespace fusedrive::model
