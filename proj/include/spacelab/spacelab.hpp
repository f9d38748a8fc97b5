#pragma once

#include "birkhoff.hpp"
#include "caps.hpp"
#include "catalog.hpp"
#include "certificate.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "group_action.hpp"
#include "hom.hpp"
#include "instance.hpp"
#include "limits.hpp"
#include "poset.hpp"
#include "power_monad.hpp"
#include "report.hpp"
#include "suites.hpp"
#include "upset_lattice.hpp"
