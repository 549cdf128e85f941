"""Small numerical kernels shared by the dimension modules."""
