#pragma once

#include "posekit/error.hpp"
#include "posekit/format.hpp"
#include "posekit/geometry.hpp"
#include "posekit/kinematics.hpp"
#include "posekit/mesh.hpp"
#include "posekit/metrics.hpp"
#include "posekit/obj_io.hpp"
#include "posekit/objectives.hpp"
#include "posekit/optimize.hpp"
#include "posekit/puppet.hpp"
#include "posekit/rotation.hpp"
#include "posekit/serialization.hpp"
#include "posekit/skinning.hpp"
#include "posekit/transfer.hpp"
