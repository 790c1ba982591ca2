#!/usr/bin/env python3
"""
Setup script for cinf-lift
"""

from setuptools import setup
import os

MODULES = [
    "main", "cli", "formats", "config", "errors", "exact_linalg", "graded_core",
    "lie_calculus", "forms_geometry", "harrison", "obstruction_lift",
]


# Read the README file
def read_readme():
    readme_path = os.path.join(os.path.dirname(__file__), 'README.md')
    if os.path.exists(readme_path):
        with open(readme_path, 'r', encoding='utf-8') as f:
            return f.read()
    return "cinf-lift - Symplectic lifting of C-infinity structures on Frobenius algebras"


# Read requirements
def read_requirements():
    requirements_path = os.path.join(os.path.dirname(__file__), 'requirements.txt')
    if os.path.exists(requirements_path):
        with open(requirements_path, 'r') as f:
            return [line.split('#')[0].strip() for line in f
                    if line.strip() and not line.startswith('#')]
    return []


setup(
    name="cinf-lift",
    version="0.3.0",
    author="cinf-lift developers",
    author_email="",
    description="Exact symplectic lifting of C-infinity structures and cyclic Harrison cohomology",
    long_description=read_readme(),
    long_description_content_type="text/markdown",
    url="",
    py_modules=MODULES,
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
    install_requires=read_requirements(),
    extras_require={"dev": ["pytest>=7.0"]},
    entry_points={
        "console_scripts": [
            "cinf-lift=main:main",
        ],
    },
    zip_safe=False,
)
