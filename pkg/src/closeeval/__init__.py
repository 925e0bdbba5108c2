"""Close evaluation of Laplace layer potentials in three dimensions."""
