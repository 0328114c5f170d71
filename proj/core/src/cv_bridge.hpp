#pragma once

#include <opencv2/core.hpp>

#include "adloc/raster.hpp"

namespace adloc::detail {

inline int mat_type(int channels) { return CV_8UC(channels); }

/// Non-owning view; the Raster must outlive the Mat.
inline cv::Mat view(const Raster& img) {
    return cv::Mat(img.height(), img.width(), mat_type(img.channels()),
                   const_cast<std::uint8_t*>(img.pixels().data()));
}

inline Raster from_mat(const cv::Mat& m) {
    CV_Assert(m.depth() == CV_8U);
    cv::Mat c = m.isContinuous() ? m : m.clone();
    std::vector<std::uint8_t> px(c.data, c.data + c.total() * c.channels());
    return Raster(c.cols, c.rows, c.channels(), std::move(px));
}

inline cv::Mat mask_view(const BinaryMask& mask) {
    return cv::Mat(mask.height(), mask.width(), CV_8UC1,
                   const_cast<std::uint8_t*>(mask.bits().data()));
}

}  // namespace adloc::detail
