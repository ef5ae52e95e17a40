// Umbrella header.
#pragma once

#include "foldmend/components.hpp"
#include "foldmend/core.hpp"
#include "foldmend/intersection.hpp"
#include "foldmend/mesh.hpp"
#include "foldmend/mesh_io.hpp"
#include "foldmend/offset.hpp"
#include "foldmend/pipeline.hpp"
#include "foldmend/repair.hpp"
