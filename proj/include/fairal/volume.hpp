#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fairal/errors.hpp"

namespace fairal {

// Dense 3D grid extents. Flat storage is x-fastest:
// offset(x,y,z) = z*(ny*nx) + y*nx + x.
struct VolumeShape {
    std::uint32_t nx = 0;
    std::uint32_t ny = 0;
    std::uint32_t nz = 0;

    std::size_t total() const {
        return static_cast<std::size_t>(nx) * ny * nz;
    }

    std::size_t index(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
        return (static_cast<std::size_t>(z) * ny + y) * nx + x;
    }

    bool operator==(const VolumeShape&) const = default;

    // Throws ConfigError on zero extents or an unaddressable voxel count.
    void validate() const;
};

struct ScalarVolume {
    VolumeShape shape;
    std::vector<double> data;

    double& at(std::uint32_t x, std::uint32_t y, std::uint32_t z) { return data[shape.index(x, y, z)]; }
    double at(std::uint32_t x, std::uint32_t y, std::uint32_t z) const { return data[shape.index(x, y, z)]; }

    static ScalarVolume filled(VolumeShape s, double value);
    // Throws ConfigError if data length or finiteness is violated.
    void validate() const;
};

// Foreground probabilities; same layout, every value in [0, 1].
struct ProbabilityVolume {
    VolumeShape shape;
    std::vector<double> data;

    double at(std::uint32_t x, std::uint32_t y, std::uint32_t z) const { return data[shape.index(x, y, z)]; }

    static ProbabilityVolume filled(VolumeShape s, double value);
    void validate() const;
};

struct BinaryMask {
    VolumeShape shape;
    std::vector<std::uint8_t> data; // 0 or 1

    bool at(std::uint32_t x, std::uint32_t y, std::uint32_t z) const { return data[shape.index(x, y, z)] != 0; }
    void set(std::uint32_t x, std::uint32_t y, std::uint32_t z, bool v) { data[shape.index(x, y, z)] = v ? 1 : 0; }

    std::size_t popcount() const;
    bool empty_mask() const { return popcount() == 0; }

    static BinaryMask filled(VolumeShape s, bool value);
    void validate() const;
};

// H(p) = -(p ln p + (1-p) ln(1-p)) in nats, with 0 ln 0 = 0.
double bernoulli_entropy(double p);

ScalarVolume bernoulli_entropy_map(const ProbabilityVolume& probs);

// Strict p > t. Throws ConfigError unless t is in (0, 1).
BinaryMask threshold(const ProbabilityVolume& probs, double t = 0.5);

// Iterated 6-connected (face neighbor) dilation, `radius` passes.
// Boundary voxels dilate only into in-bounds neighbors.
BinaryMask dilate(const BinaryMask& mask, int radius);

// Mean of values at true voxels. Throws EmptyRegion on an all-false mask,
// ShapeMismatch when shapes differ.
double masked_mean(const ScalarVolume& values, const BinaryMask& mask);

} // namespace fairal
