#pragma once

#include "handrig/error.hpp"
#include "handrig/hand_model.hpp"
#include "handrig/projection.hpp"
#include "handrig/retarget.hpp"
#include "handrig/rotation.hpp"
#include "handrig/segmentation.hpp"
#include "handrig/urdf.hpp"
#include "handrig/version.hpp"
