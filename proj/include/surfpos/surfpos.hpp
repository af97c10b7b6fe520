#pragma once

#include "surfpos/error.hpp"
#include "surfpos/geometry.hpp"
#include "surfpos/horn.hpp"
#include "surfpos/spatial_index.hpp"
#include "surfpos/poisson.hpp"
#include "surfpos/global_icp.hpp"
#include "surfpos/scene.hpp"
#include "surfpos/markers.hpp"
#include "surfpos/heightmap.hpp"
#include "surfpos/compare.hpp"
#include "surfpos/pipeline.hpp"
#include "surfpos/synthgen.hpp"
#include "surfpos/io.hpp"
#include "surfpos/config.hpp"
#include "surfpos/app.hpp"
