#include "segforge/image.hpp"

#include <algorithm>

namespace segforge {

Image Image::filled(int height, int width, double value) {
    Image img;
    img.height = height;
    img.width = width;
    img.data.assign(static_cast<size_t>(height) * width * 3, value);
    return img;
}

ClassMask ClassMask::filled(int height, int width, uint8_t value) {
    ClassMask m;
    m.height = height;
    m.width = width;
    m.values.assign(static_cast<size_t>(height) * width, value);
    return m;
}

uint8_t ClassMask::max_value() const {
    uint8_t mx = 0;
    for (uint8_t v : values) mx = std::max(mx, v);
    return mx;
}

} // namespace segforge
