# file required until PEP660 is correctly supported by setuptools
# https://github.com/pypa/setuptools/issues/2816

from setuptools import setup

setup()
