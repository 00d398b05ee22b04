"""Offline figure rendering for balo-fv outputs.

Reads the solver's snapshot CSVs (header ``t,i,j,x,y,m,c,d``, row-major) and
report files; emits PNG images. Pure consumer of the documented file
formats; does not import the solver package.
"""

__version__ = "0.1.0"
