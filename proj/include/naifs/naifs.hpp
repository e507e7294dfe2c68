#pragma once

#include "naifs/errors.hpp"
#include "naifs/random.hpp"
#include "naifs/parallel.hpp"
#include "naifs/spaces.hpp"
#include "naifs/map_zoo.hpp"
#include "naifs/naifs_core.hpp"
#include "naifs/exact_search.hpp"
#include "naifs/fit.hpp"
#include "naifs/entropy.hpp"
#include "naifs/certificate.hpp"
#include "naifs/pressure.hpp"
#include "naifs/properties.hpp"
#include "naifs/io.hpp"
#include "naifs/config.hpp"
#include "naifs/runner.hpp"
