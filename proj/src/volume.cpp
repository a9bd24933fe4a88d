#include "fairal/volume.hpp"

#include <cmath>
#include <limits>

namespace fairal {

void VolumeShape::validate() const {
    if (nx < 1 || ny < 1 || nz < 1) {
        throw ConfigError("volume shape: all extents must be >= 1");
    }
    const std::size_t max = std::numeric_limits<std::size_t>::max();
    if (ny != 0 && static_cast<std::size_t>(nx) > max / ny) {
        throw ConfigError("volume shape: voxel count overflows");
    }
    const std::size_t xy = static_cast<std::size_t>(nx) * ny;
    if (nz != 0 && xy > max / nz) {
        throw ConfigError("volume shape: voxel count overflows");
    }
}

ScalarVolume ScalarVolume::filled(VolumeShape s, double value) {
    s.validate();
    return ScalarVolume{s, std::vector<double>(s.total(), value)};
}

void ScalarVolume::validate() const {
    shape.validate();
    if (data.size() != shape.total()) {
        throw ConfigError("scalar volume: data length does not match shape");
    }
    for (double v : data) {
        if (!std::isfinite(v)) throw ConfigError("scalar volume: non-finite value");
    }
}

ProbabilityVolume ProbabilityVolume::filled(VolumeShape s, double value) {
    s.validate();
    return ProbabilityVolume{s, std::vector<double>(s.total(), value)};
}

void ProbabilityVolume::validate() const {
    shape.validate();
    if (data.size() != shape.total()) {
        throw ConfigError("probability volume: data length does not match shape");
    }
    for (double v : data) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ConfigError("probability volume: value outside [0, 1]");
        }
    }
}

std::size_t BinaryMask::popcount() const {
    std::size_t n = 0;
    for (std::uint8_t v : data) n += (v != 0);
    return n;
}

BinaryMask BinaryMask::filled(VolumeShape s, bool value) {
    s.validate();
    return BinaryMask{s, std::vector<std::uint8_t>(s.total(), value ? 1 : 0)};
}

void BinaryMask::validate() const {
    shape.validate();
    if (data.size() != shape.total()) {
        throw ConfigError("binary mask: data length does not match shape");
    }
}

double bernoulli_entropy(double p) {
    double h = 0.0;
    if (p > 0.0) h -= p * std::log(p);
    if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
    return h;
}

ScalarVolume bernoulli_entropy_map(const ProbabilityVolume& probs) {
    ScalarVolume out{probs.shape, std::vector<double>(probs.data.size())};
    for (std::size_t i = 0; i < probs.data.size(); ++i) {
        out.data[i] = bernoulli_entropy(probs.data[i]);
    }
    return out;
}

BinaryMask threshold(const ProbabilityVolume& probs, double t) {
    if (!(t > 0.0 && t < 1.0)) {
        throw ConfigError("threshold: t must be in (0, 1)");
    }
    BinaryMask out{probs.shape, std::vector<std::uint8_t>(probs.data.size())};
    for (std::size_t i = 0; i < probs.data.size(); ++i) {
        out.data[i] = probs.data[i] > t ? 1 : 0;
    }
    return out;
}

namespace {

// One 6-connected pass.
BinaryMask dilate_once(const BinaryMask& mask) {
    const VolumeShape& s = mask.shape;
    BinaryMask out = mask;
    for (std::uint32_t z = 0; z < s.nz; ++z) {
        for (std::uint32_t y = 0; y < s.ny; ++y) {
            for (std::uint32_t x = 0; x < s.nx; ++x) {
                if (!mask.at(x, y, z)) continue;
                if (x > 0) out.set(x - 1, y, z, true);
                if (x + 1 < s.nx) out.set(x + 1, y, z, true);
                if (y > 0) out.set(x, y - 1, z, true);
                if (y + 1 < s.ny) out.set(x, y + 1, z, true);
                if (z > 0) out.set(x, y, z - 1, true);
                if (z + 1 < s.nz) out.set(x, y, z + 1, true);
            }
        }
    }
    return out;
}

} // namespace

BinaryMask dilate(const BinaryMask& mask, int radius) {
    if (radius < 0) throw ConfigError("dilate: radius must be >= 0");
    BinaryMask out = mask;
    for (int r = 0; r < radius; ++r) {
        out = dilate_once(out);
    }
    return out;
}

double masked_mean(const ScalarVolume& values, const BinaryMask& mask) {
    if (values.shape != mask.shape) {
        throw ShapeMismatch("masked_mean: value and mask shapes differ");
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < values.data.size(); ++i) {
        if (mask.data[i]) {
            sum += values.data[i];
            ++n;
        }
    }
    if (n == 0) throw EmptyRegion("masked_mean: mask selects no voxels");
    return sum / static_cast<double>(n);
}

} // namespace fairal
