#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "segforge/error.hpp"

namespace segforge::kernels {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw ShapeError(msg);
}

/// col[(ci*kh+r)*kw+s][oy*wout+ox] = padded input patch element, 0 outside.
void im2col(const double* in, double* col, const Conv2dDims& d) {
    const int64_t cols = d.col_cols();
    for (int64_t ci = 0; ci < d.cin; ++ci) {
        const double* plane = in + ci * d.h * d.w;
        for (int64_t r = 0; r < d.kh; ++r) {
            for (int64_t s = 0; s < d.kw; ++s) {
                double* row = col + ((ci * d.kh + r) * d.kw + s) * cols;
                for (int64_t oy = 0; oy < d.hout; ++oy) {
                    const int64_t iy = oy * d.stride - d.pad + r;
                    double* dst = row + oy * d.wout;
                    if (iy < 0 || iy >= d.h) {
                        std::fill(dst, dst + d.wout, 0.0);
                        continue;
                    }
                    const double* src = plane + iy * d.w;
                    for (int64_t ox = 0; ox < d.wout; ++ox) {
                        const int64_t ix = ox * d.stride - d.pad + s;
                        dst[ox] = (ix >= 0 && ix < d.w) ? src[ix] : 0.0;
                    }
                }
            }
        }
    }
}

/// Scatter-add of a column buffer back onto the (unpadded) input plane.
void col2im_add(const double* col, double* gin, const Conv2dDims& d) {
    const int64_t cols = d.col_cols();
    for (int64_t ci = 0; ci < d.cin; ++ci) {
        double* plane = gin + ci * d.h * d.w;
        for (int64_t r = 0; r < d.kh; ++r) {
            for (int64_t s = 0; s < d.kw; ++s) {
                const double* row = col + ((ci * d.kh + r) * d.kw + s) * cols;
                for (int64_t oy = 0; oy < d.hout; ++oy) {
                    const int64_t iy = oy * d.stride - d.pad + r;
                    if (iy < 0 || iy >= d.h) continue;
                    double* dst = plane + iy * d.w;
                    const double* src = row + oy * d.wout;
                    for (int64_t ox = 0; ox < d.wout; ++ox) {
                        const int64_t ix = ox * d.stride - d.pad + s;
                        if (ix >= 0 && ix < d.w) dst[ix] += src[ox];
                    }
                }
            }
        }
    }
}

} // namespace

Conv2dDims conv2d_dims(const std::vector<int64_t>& in_shape, const std::vector<int64_t>& k_shape,
                       int64_t stride, int64_t pad) {
    require(in_shape.size() == 4, "conv2d: input must be 4-D (N,C,H,W)");
    require(k_shape.size() == 4, "conv2d: kernel must be 4-D (Cout,Cin,kh,kw)");
    Conv2dDims d;
    d.n = in_shape[0];
    d.cin = in_shape[1];
    d.h = in_shape[2];
    d.w = in_shape[3];
    d.cout = k_shape[0];
    d.kh = k_shape[2];
    d.kw = k_shape[3];
    d.stride = stride;
    d.pad = pad;
    require(k_shape[1] == d.cin, "conv2d: kernel Cin does not match input channels");
    require(stride >= 1, "conv2d: stride must be >= 1");
    require(pad >= 0, "conv2d: padding must be >= 0");
    require(d.kh <= d.h + 2 * pad && d.kw <= d.w + 2 * pad,
            "conv2d: kernel larger than padded input");
    d.hout = (d.h + 2 * pad - d.kh) / stride + 1;
    d.wout = (d.w + 2 * pad - d.kw) / stride + 1;
    require(d.hout >= 1 && d.wout >= 1, "conv2d: output extent < 1");
    return d;
}

void conv2d_forward(const double* in, const double* kernel, const double* bias, double* out,
                    const Conv2dDims& d) {
    const int64_t rows = d.col_rows();
    const int64_t cols = d.col_cols();
    std::vector<double> col(static_cast<size_t>(rows * cols));
    for (int64_t n = 0; n < d.n; ++n) {
        im2col(in + n * d.cin * d.h * d.w, col.data(), d);
        double* out_n = out + n * d.cout * cols;
        for (int64_t co = 0; co < d.cout; ++co) {
            double* out_row = out_n + co * cols;
            std::fill(out_row, out_row + cols, bias ? bias[co] : 0.0);
            const double* krow = kernel + co * rows;
            for (int64_t k = 0; k < rows; ++k) {
                const double a = krow[k];
                const double* crow = col.data() + k * cols;
                for (int64_t j = 0; j < cols; ++j) out_row[j] += a * crow[j];
            }
        }
    }
}

void conv2d_backward(const double* in, const double* kernel, const double* gout,
                     double* gin, double* gkernel, double* gbias, const Conv2dDims& d) {
    const int64_t rows = d.col_rows();
    const int64_t cols = d.col_cols();
    std::vector<double> col;
    std::vector<double> gcol;
    if (gkernel || gin) col.resize(static_cast<size_t>(rows * cols));
    if (gin) gcol.resize(static_cast<size_t>(rows * cols));
    for (int64_t n = 0; n < d.n; ++n) {
        const double* gout_n = gout + n * d.cout * cols;
        if (gkernel || gin) im2col(in + n * d.cin * d.h * d.w, col.data(), d);
        if (gbias) {
            for (int64_t co = 0; co < d.cout; ++co) {
                const double* grow = gout_n + co * cols;
                double acc = 0.0;
                for (int64_t j = 0; j < cols; ++j) acc += grow[j];
                gbias[co] += acc;
            }
        }
        if (gkernel) {
            for (int64_t co = 0; co < d.cout; ++co) {
                const double* grow = gout_n + co * cols;
                double* krow = gkernel + co * rows;
                for (int64_t k = 0; k < rows; ++k) {
                    const double* crow = col.data() + k * cols;
                    double acc = 0.0;
                    for (int64_t j = 0; j < cols; ++j) acc += grow[j] * crow[j];
                    krow[k] += acc;
                }
            }
        }
        if (gin) {
            std::fill(gcol.begin(), gcol.end(), 0.0);
            for (int64_t co = 0; co < d.cout; ++co) {
                const double* grow = gout_n + co * cols;
                const double* krow = kernel + co * rows;
                for (int64_t k = 0; k < rows; ++k) {
                    const double a = krow[k];
                    double* crow = gcol.data() + k * cols;
                    for (int64_t j = 0; j < cols; ++j) crow[j] += a * grow[j];
                }
            }
            col2im_add(gcol.data(), gin + n * d.cin * d.h * d.w, d);
        }
    }
}

ConvT2dDims convt2d_dims(const std::vector<int64_t>& in_shape, const std::vector<int64_t>& k_shape,
                         int64_t stride, int64_t pad) {
    require(in_shape.size() == 4, "conv2d_transpose: input must be 4-D (N,C,H,W)");
    require(k_shape.size() == 4, "conv2d_transpose: kernel must be 4-D (Cin,Cout,kh,kw)");
    ConvT2dDims d;
    d.n = in_shape[0];
    d.cin = in_shape[1];
    d.h = in_shape[2];
    d.w = in_shape[3];
    d.cout = k_shape[1];
    d.kh = k_shape[2];
    d.kw = k_shape[3];
    d.stride = stride;
    d.pad = pad;
    require(k_shape[0] == d.cin, "conv2d_transpose: kernel Cin does not match input channels");
    require(stride >= 1, "conv2d_transpose: stride must be >= 1");
    require(pad >= 0, "conv2d_transpose: padding must be >= 0");
    d.hout = (d.h - 1) * stride - 2 * pad + d.kh;
    d.wout = (d.w - 1) * stride - 2 * pad + d.kw;
    require(d.hout >= 1 && d.wout >= 1, "conv2d_transpose: output extent < 1");
    return d;
}

void convt2d_forward(const double* in, const double* kernel, const double* bias, double* out,
                     const ConvT2dDims& d) {
    const int64_t in_plane = d.h * d.w;
    const int64_t out_plane = d.hout * d.wout;
    for (int64_t n = 0; n < d.n; ++n) {
        double* out_n = out + n * d.cout * out_plane;
        for (int64_t co = 0; co < d.cout; ++co) {
            double* orow = out_n + co * out_plane;
            std::fill(orow, orow + out_plane, bias ? bias[co] : 0.0);
        }
        const double* in_n = in + n * d.cin * in_plane;
        for (int64_t ci = 0; ci < d.cin; ++ci) {
            const double* plane = in_n + ci * in_plane;
            for (int64_t co = 0; co < d.cout; ++co) {
                const double* krow = kernel + (ci * d.cout + co) * d.kh * d.kw;
                double* oplane = out_n + co * out_plane;
                for (int64_t iy = 0; iy < d.h; ++iy) {
                    for (int64_t ix = 0; ix < d.w; ++ix) {
                        const double v = plane[iy * d.w + ix];
                        for (int64_t r = 0; r < d.kh; ++r) {
                            const int64_t oy = iy * d.stride - d.pad + r;
                            if (oy < 0 || oy >= d.hout) continue;
                            for (int64_t s = 0; s < d.kw; ++s) {
                                const int64_t ox = ix * d.stride - d.pad + s;
                                if (ox < 0 || ox >= d.wout) continue;
                                oplane[oy * d.wout + ox] += v * krow[r * d.kw + s];
                            }
                        }
                    }
                }
            }
        }
    }
}

void convt2d_backward(const double* in, const double* kernel, const double* gout,
                      double* gin, double* gkernel, double* gbias, const ConvT2dDims& d) {
    const int64_t in_plane = d.h * d.w;
    const int64_t out_plane = d.hout * d.wout;
    for (int64_t n = 0; n < d.n; ++n) {
        const double* gout_n = gout + n * d.cout * out_plane;
        const double* in_n = in + n * d.cin * in_plane;
        if (gbias) {
            for (int64_t co = 0; co < d.cout; ++co) {
                const double* grow = gout_n + co * out_plane;
                double acc = 0.0;
                for (int64_t j = 0; j < out_plane; ++j) acc += grow[j];
                gbias[co] += acc;
            }
        }
        for (int64_t ci = 0; ci < d.cin; ++ci) {
            const double* iplane = in_n + ci * in_plane;
            double* giplane = gin ? gin + (n * d.cin + ci) * in_plane : nullptr;
            for (int64_t co = 0; co < d.cout; ++co) {
                const double* krow = kernel + (ci * d.cout + co) * d.kh * d.kw;
                double* gkrow = gkernel ? gkernel + (ci * d.cout + co) * d.kh * d.kw : nullptr;
                const double* goplane = gout_n + co * out_plane;
                for (int64_t iy = 0; iy < d.h; ++iy) {
                    for (int64_t ix = 0; ix < d.w; ++ix) {
                        const double v = iplane[iy * d.w + ix];
                        double gacc = 0.0;
                        for (int64_t r = 0; r < d.kh; ++r) {
                            const int64_t oy = iy * d.stride - d.pad + r;
                            if (oy < 0 || oy >= d.hout) continue;
                            for (int64_t s = 0; s < d.kw; ++s) {
                                const int64_t ox = ix * d.stride - d.pad + s;
                                if (ox < 0 || ox >= d.wout) continue;
                                const double g = goplane[oy * d.wout + ox];
                                gacc += g * krow[r * d.kw + s];
                                if (gkrow) gkrow[r * d.kw + s] += v * g;
                            }
                        }
                        if (giplane) giplane[iy * d.w + ix] += gacc;
                    }
                }
            }
        }
    }
}

Pool2dDims maxpool2d_dims(const std::vector<int64_t>& in_shape, int64_t window, int64_t stride) {
    require(in_shape.size() == 4, "maxpool2d: input must be 4-D (N,C,H,W)");
    Pool2dDims d;
    d.n = in_shape[0];
    d.c = in_shape[1];
    d.h = in_shape[2];
    d.w = in_shape[3];
    d.window = window;
    d.stride = stride;
    require(window >= 1 && stride >= 1, "maxpool2d: window and stride must be >= 1");
    require(window <= d.h && window <= d.w, "maxpool2d: window larger than spatial extent");
    d.hout = (d.h - window) / stride + 1;
    d.wout = (d.w - window) / stride + 1;
    return d;
}

void maxpool2d_forward(const double* in, double* out, int64_t* argmax, const Pool2dDims& d) {
    int64_t o = 0;
    for (int64_t n = 0; n < d.n; ++n) {
        for (int64_t c = 0; c < d.c; ++c) {
            const int64_t plane_base = (n * d.c + c) * d.h * d.w;
            const double* plane = in + plane_base;
            for (int64_t oy = 0; oy < d.hout; ++oy) {
                for (int64_t ox = 0; ox < d.wout; ++ox, ++o) {
                    const int64_t y0 = oy * d.stride;
                    const int64_t x0 = ox * d.stride;
                    double best = plane[y0 * d.w + x0];
                    int64_t best_idx = y0 * d.w + x0;
                    for (int64_t r = 0; r < d.window; ++r) {
                        for (int64_t s = 0; s < d.window; ++s) {
                            const int64_t idx = (y0 + r) * d.w + (x0 + s);
                            if (plane[idx] > best) { // strict: first max wins ties
                                best = plane[idx];
                                best_idx = idx;
                            }
                        }
                    }
                    out[o] = best;
                    argmax[o] = plane_base + best_idx;
                }
            }
        }
    }
}

void softmax_channels_forward(const double* in, double* out, int64_t n, int64_t c, int64_t hw) {
    for (int64_t i = 0; i < n; ++i) {
        const double* in_i = in + i * c * hw;
        double* out_i = out + i * c * hw;
        for (int64_t p = 0; p < hw; ++p) {
            double mx = in_i[p];
            for (int64_t ch = 1; ch < c; ++ch) mx = std::max(mx, in_i[ch * hw + p]);
            double denom = 0.0;
            for (int64_t ch = 0; ch < c; ++ch) {
                const double e = std::exp(in_i[ch * hw + p] - mx);
                out_i[ch * hw + p] = e;
                denom += e;
            }
            for (int64_t ch = 0; ch < c; ++ch) out_i[ch * hw + p] /= denom;
        }
    }
}

void softmax_channels_backward(const double* y, const double* gout, double* gin,
                               int64_t n, int64_t c, int64_t hw) {
    for (int64_t i = 0; i < n; ++i) {
        const double* y_i = y + i * c * hw;
        const double* g_i = gout + i * c * hw;
        double* o_i = gin + i * c * hw;
        for (int64_t p = 0; p < hw; ++p) {
            double dot = 0.0;
            for (int64_t ch = 0; ch < c; ++ch) dot += g_i[ch * hw + p] * y_i[ch * hw + p];
            for (int64_t ch = 0; ch < c; ++ch) {
                o_i[ch * hw + p] += y_i[ch * hw + p] * (g_i[ch * hw + p] - dot);
            }
        }
    }
}

} // namespace segforge::kernels
