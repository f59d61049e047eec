from .integrate import Trajectory, integrate
from .cycles import (BistabilityReport, CycleInfo, RunResult, check_face_no_cycles,
                     detect_bistability, detect_cycle, sample_face, sample_interior)
from .persistence import (PersistenceVerdict, persistence_check,
                          verify_persistence_by_simulation)
