from setuptools import setup

setup(
    name='visionsafety',
    version='0.1.0',
    description='Declarative safety rules for stereo camera perception pipelines.',
    license='MIT',
    packages=['visionsafety', 'visionsafety.rules', 'visionsafety.pipeline',
              'visionsafety.kernels'],
    install_requires=['numpy>=1.20', 'PyYAML>=5.4'],
    entry_points={
        'console_scripts': ['visionsafety = visionsafety.cli:main'],
    },
    classifiers=[
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
        'Programming Language :: Python :: 3',
    ]
)
