# This file makes the 'mtl' directory a Python package.
