#pragma once

// Umbrella header for the whole library.

#include "uavsat/augmentation.hpp"
#include "uavsat/blur_metric.hpp"
#include "uavsat/calibration.hpp"
#include "uavsat/errors.hpp"
#include "uavsat/fft.hpp"
#include "uavsat/image_io.hpp"
#include "uavsat/kernel.hpp"
#include "uavsat/labels.hpp"
#include "uavsat/optics.hpp"
#include "uavsat/patch_pair.hpp"
#include "uavsat/pipeline.hpp"
#include "uavsat/random.hpp"
#include "uavsat/raster.hpp"
#include "uavsat/registration.hpp"
#include "uavsat/resample.hpp"
#include "uavsat/tiling.hpp"
