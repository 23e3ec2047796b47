"""
A setuptools based setup module.
References: https://github.com/pypa/sampleproject
"""
from setuptools import setup, find_packages

# Long description is just the contents of README.md
long_description = 'Read README.md for long description'

setup(
      # Users can install the project with the following command:
      #           $ pip install .
      name='cfhandoff',
      # Versions should comply with PEP 440 :
      #           https://www.python.org/dev/peps/pep-0440/
      version='0.1.0.dev0',
      # Packages can be manually mentioned, or `setuptools.find_packages`
      # can be used for this purpose.
      packages=find_packages(exclude=['tests']),
      package_data={'cfhandoff': ['configs/*.json', 'sim/reproduce.sh']},
      entry_points={'console_scripts': ['cfhandoff = cfhandoff.main:launch']},
      install_requires=[
            'numpy>=1.25',
            'scipy',
            'tqdm',
      ],
      extras_require={'test': ['pytest>=7']},
      description='POMDP-based handoff management for cell-free massive MIMO',
      long_description=long_description,
      classifiers=[
            'Intended Audience :: Science/Research',
            'Topic :: Scientific/Engineering',

            'Programming Language :: Python :: 3.9',
      ],
      python_requires='>=3.9',
      )
