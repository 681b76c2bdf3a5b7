"""structsolve: partitioned solvers for structured linear systems and time-parallel linear IVPs."""
