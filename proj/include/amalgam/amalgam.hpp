#pragma once

#include "amalgam/error.hpp"
#include "amalgam/matrix.hpp"
#include "amalgam/algebra.hpp"
#include "amalgam/tensor.hpp"
#include "amalgam/nc_partition.hpp"
#include "amalgam/distribution.hpp"
#include "amalgam/cumulants.hpp"
#include "amalgam/models.hpp"
#include "amalgam/transforms.hpp"
#include "amalgam/free_dist.hpp"
#include "amalgam/serialize.hpp"
#include "amalgam/random.hpp"
#include "amalgam/suite.hpp"
