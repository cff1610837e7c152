#pragma once

#include "hardstop/config.hpp"
#include "hardstop/contact.hpp"
#include "hardstop/engage.hpp"
#include "hardstop/errors.hpp"
#include "hardstop/geometry.hpp"
#include "hardstop/io.hpp"
#include "hardstop/optimize.hpp"
#include "hardstop/spaces.hpp"
#include "hardstop/stress.hpp"
#include "hardstop/trajectory.hpp"
