#pragma once

#include "elasticmesh/errors.hpp"
#include "elasticmesh/field.hpp"
#include "elasticmesh/imageio.hpp"
#include "elasticmesh/kmeans.hpp"
#include "elasticmesh/merging.hpp"
#include "elasticmesh/mesh.hpp"
#include "elasticmesh/segmentation.hpp"
#include "elasticmesh/testimages.hpp"
