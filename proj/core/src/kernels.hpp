#pragma once

// Internal dense kernels behind the graph ops. Not installed.

#include <cstdint>
#include <vector>

namespace segforge::kernels {

struct Conv2dDims {
    int64_t n, cin, h, w;
    int64_t cout, kh, kw;
    int64_t stride, pad;
    int64_t hout, wout;
    int64_t col_rows() const { return cin * kh * kw; }
    int64_t col_cols() const { return hout * wout; }
};

/// Shape arithmetic + validation; throws ShapeError.
Conv2dDims conv2d_dims(const std::vector<int64_t>& in_shape, const std::vector<int64_t>& k_shape,
                       int64_t stride, int64_t pad);

void conv2d_forward(const double* in, const double* kernel, const double* bias, double* out,
                    const Conv2dDims& d);
/// Any of gin/gkernel/gbias may be null; non-null buffers are accumulated into.
void conv2d_backward(const double* in, const double* kernel, const double* gout,
                     double* gin, double* gkernel, double* gbias, const Conv2dDims& d);

struct ConvT2dDims {
    int64_t n, cin, h, w;
    int64_t cout, kh, kw;
    int64_t stride, pad;
    int64_t hout, wout;
};

ConvT2dDims convt2d_dims(const std::vector<int64_t>& in_shape, const std::vector<int64_t>& k_shape,
                         int64_t stride, int64_t pad);

void convt2d_forward(const double* in, const double* kernel, const double* bias, double* out,
                     const ConvT2dDims& d);
void convt2d_backward(const double* in, const double* kernel, const double* gout,
                      double* gin, double* gkernel, double* gbias, const ConvT2dDims& d);

struct Pool2dDims {
    int64_t n, c, h, w;
    int64_t window, stride;
    int64_t hout, wout;
};

Pool2dDims maxpool2d_dims(const std::vector<int64_t>& in_shape, int64_t window, int64_t stride);

/// argmax receives, per output element, the flat index of the chosen input
/// element (first maximum in row-major window scan).
void maxpool2d_forward(const double* in, double* out, int64_t* argmax, const Pool2dDims& d);

/// Per-pixel channel softmax with max subtraction; in/out shaped (N,C,H,W).
void softmax_channels_forward(const double* in, double* out, int64_t n, int64_t c, int64_t hw);
/// dlogits = y * (g - sum_c g*y), accumulated into gin.
void softmax_channels_backward(const double* y, const double* gout, double* gin,
                               int64_t n, int64_t c, int64_t hw);

} // namespace segforge::kernels
