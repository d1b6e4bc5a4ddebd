#pragma once

#include "spinpurge/dicke.hpp"
#include "spinpurge/engine.hpp"
#include "spinpurge/errors.hpp"
#include "spinpurge/model.hpp"
#include "spinpurge/netgraph.hpp"
#include "spinpurge/parallel.hpp"
#include "spinpurge/qmat.hpp"
