import os

# single-threaded BLAS: runs are parallelized at the process level and the
# matrices are small; also keeps results identical across worker counts
for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(var, "1")
