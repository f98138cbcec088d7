from setuptools import setup

setup(name="toolkit", version="1.3")
