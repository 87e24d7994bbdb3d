#pragma once

#include "oline/common.hpp"
#include "oline/error.hpp"
#include "oline/line_space.hpp"
#include "oline/surfaces.hpp"
#include "oline/optics.hpp"
#include "oline/families.hpp"
#include "oline/variational.hpp"
#include "oline/scene.hpp"
#include "oline/cli.hpp"
