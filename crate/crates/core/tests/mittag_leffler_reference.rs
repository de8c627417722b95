//! Mittag-Leffler values against an arbitrary-precision reference.
//!
//! The tables were produced with mpmath: the power series summed at 260
//! significant digits, and for the large negative arguments the real-line
//! integral representation evaluated at 40 digits.

use fpdvi_core::mittag_leffler::{ml_real, ml_scalar, MLParams};
use num_complex::Complex64;

#[rustfmt::skip]
const SERIES_TABLE: &[(f64, f64, (f64, f64), (f64, f64))] = &[
    (0.25, 0.5, (-3.0, 0.0), (0.08708261429662854, 0.0)),
    (0.25, 0.5, (-1.0, 0.0), (0.21199340525120658, 0.0)),
    (0.25, 0.5, (-0.2, 0.0), (0.43366527456237397, 0.0)),
    (0.25, 0.5, (0.4, 0.0), (1.16752039258456, 0.0)),
    (0.25, 0.5, (2.0, 0.0), (142177768.23601058, 0.0)),
    (0.25, 1.0, (-3.0, 0.0), (0.2190044275604068, 0.0)),
    (0.25, 1.0, (-1.0, 0.0), (0.4638527608017133, 0.0)),
    (0.25, 1.0, (-0.2, 0.0), (0.8171369708567573, 0.0)),
    (0.25, 1.0, (0.4, 0.0), (1.7306952087343657, 0.0)),
    (0.25, 1.0, (2.0, 0.0), (35544441.50993078, 0.0)),
    (0.25, 1.5, (-3.0, 0.0), (0.2809769312803243, 0.0)),
    (0.25, 1.5, (-1.0, 0.0), (0.5671154121225506, 0.0)),
    (0.25, 1.5, (-0.2, 0.0), (0.9447375280231176, 0.0)),
    (0.25, 1.5, (0.4, 0.0), (1.808688426287692, 0.0)),
    (0.25, 1.5, (2.0, 0.0), (8886109.57585137, 0.0)),
    (0.25, 2.0, (-3.0, 0.0), (0.2685326133975404, 0.0)),
    (0.25, 2.0, (-1.0, 0.0), (0.5268014971580552, 0.0)),
    (0.25, 2.0, (-0.2, 0.0), (0.8492852838452132, 0.0)),
    (0.25, 2.0, (0.4, 0.0), (1.5317697396235788, 0.0)),
    (0.25, 2.0, (2.0, 0.0), (2221526.5678354246, 0.0)),
    (0.5, 0.5, (-10.0, 0.0), (0.0027796561095304283, 0.0)),
    (0.5, 0.5, (-7.5, 0.0), (0.004886885576181164, 0.0)),
    (0.5, 0.5, (-3.0, 0.0), (0.027186130003586436, 0.0)),
    (0.5, 0.5, (-1.0, 0.0), (0.13660600739194928, 0.0)),
    (0.5, 0.5, (-0.2, 0.0), (0.40238567956744015, 0.0)),
    (0.5, 0.5, (0.4, 0.0), (1.2346831662233, 0.0)),
    (0.5, 0.5, (2.0, 0.0), (218.4459983635037, 0.0)),
    (0.5, 0.5, (6.0, 0.0), (5.1734778565382344e+16, 0.0)),
    (0.5, 0.5, (10.0, 0.0), (5.376234283632271e+44, 0.0)),
    (0.5, 0.5, (3.0, 4.0), (0.006383749372778157, -0.013004119842100535)),
    (0.5, 0.5, (-6.0, 2.0), (0.005563100907612962, 0.00399222957047207)),
    (0.5, 0.5, (0.0, 9.0), (-0.0035492269855682906, 5.975709479622661e-35)),
    (0.5, 1.0, (-10.0, 0.0), (0.05614099274382259, 0.0)),
    (0.5, 1.0, (-7.5, 0.0), (0.07457369306287669, 0.0)),
    (0.5, 1.0, (-3.0, 0.0), (0.17900115118138996, 0.0)),
    (0.5, 1.0, (-1.0, 0.0), (0.427583576155807, 0.0)),
    (0.5, 1.0, (-0.2, 0.0), (0.8090195199015807, 0.0)),
    (0.5, 1.0, (0.4, 0.0), (1.676233956688859, 0.0)),
    (0.5, 1.0, (2.0, 0.0), (108.94090438997797, 0.0)),
    (0.5, 1.0, (6.0, 0.0), (8622463094230390.0, 0.0)),
    (0.5, 1.0, (10.0, 0.0), (5.376234283632271e+43, 0.0)),
    (0.5, 1.0, (3.0, 4.0), (-0.06901735927573346, 0.08768843908694443)),
    (0.5, 1.0, (-6.0, 2.0), (0.0839935838745451, 0.027332489696436355)),
    (0.5, 1.0, (0.0, 9.0), (6.639677199580735e-36, 0.06308209005925829)),
    (0.5, 1.5, (-10.0, 0.0), (0.09438590072561774, 0.0)),
    (0.5, 1.5, (-7.5, 0.0), (0.12339017425828311, 0.0)),
    (0.5, 1.5, (-3.0, 0.0), (0.2736662829395367, 0.0)),
    (0.5, 1.5, (-1.0, 0.0), (0.572416423844193, 0.0)),
    (0.5, 1.5, (-0.2, 0.0), (0.9549024004920963, 0.0)),
    (0.5, 1.5, (0.4, 0.0), (1.6905848917221473, 0.0)),
    (0.5, 1.5, (2.0, 0.0), (53.97045219498899, 0.0)),
    (0.5, 1.5, (6.0, 0.0), (1437077182371731.5, 0.0)),
    (0.5, 1.5, (10.0, 0.0), (5.376234283632271e+42, 0.0)),
    (0.5, 1.5, (3.0, 4.0), (-0.11425193285917691, 0.18156539017455067)),
    (0.5, 1.5, (-6.0, 2.0), (0.13876758690364005, 0.04170044735180729)),
    (0.5, 1.5, (0.0, 9.0), (0.007009121117695365, 0.1111111111111111)),
    (0.5, 2.0, (-10.0, 0.0), (0.10339932663698949, 0.0)),
    (0.5, 2.0, (-7.5, 0.0), (0.13399853237829726, 0.0)),
    (0.5, 2.0, (-3.0, 0.0), (0.28490429471865863, 0.0)),
    (0.5, 2.0, (-1.0, 0.0), (0.5559627432513196, 0.0)),
    (0.5, 2.0, (-0.2, 0.0), (0.8673838330170814, 0.0)),
    (0.5, 2.0, (0.4, 0.0), (1.405514311566587, 0.0)),
    (0.5, 2.0, (2.0, 0.0), (26.42103651394674, 0.0)),
    (0.5, 2.0, (6.0, 0.0), (239512863728621.75, 0.0)),
    (0.5, 2.0, (10.0, 0.0), (5.376234283632271e+41, 0.0)),
    (0.5, 2.0, (3.0, 4.0), (-0.12006526956663463, 0.2206088228136964)),
    (0.5, 2.0, (-6.0, 2.0), (0.15052675939637125, 0.043225511906822535)),
    (0.5, 2.0, (0.0, 9.0), (0.012345679012345678, 0.12459667177531303)),
    (0.75, 0.5, (-10.0, 0.0), (-0.019917635219723926, 0.0)),
    (0.75, 0.5, (-7.5, 0.0), (-0.025954128895720335, 0.0)),
    (0.75, 0.5, (-3.0, 0.0), (-0.04471085107777257, 0.0)),
    (0.75, 0.5, (-1.0, 0.0), (0.05112282253641396, 0.0)),
    (0.75, 0.5, (-0.2, 0.0), (0.37900837152488304, 0.0)),
    (0.75, 0.5, (0.4, 0.0), (1.2144197578086884, 0.0)),
    (0.75, 0.5, (2.0, 0.0), (26.38869742946251, 0.0)),
    (0.75, 0.5, (6.0, 0.0), (239165.74396586895, 0.0)),
    (0.75, 0.5, (10.0, 0.0), (14066834512.745043, 0.0)),
    (0.75, 0.5, (3.0, 4.0), (-48.02881148396303, 43.00051367800887)),
    (0.75, 0.5, (-6.0, 2.0), (-0.02955189875370428, -0.008267637331279774)),
    (0.75, 0.5, (0.0, 9.0), (0.00014983139779797719, -0.023626529737201796)),
    (0.75, 1.0, (-10.0, 0.0), (0.030643250976059636, 0.0)),
    (0.75, 1.0, (-7.5, 0.0), (0.04232871919944659, 0.0)),
    (0.75, 1.0, (-3.0, 0.0), (0.12585513691184153, 0.0)),
    (0.75, 1.0, (-1.0, 0.0), (0.39310830281575404, 0.0)),
    (0.75, 1.0, (-0.2, 0.0), (0.8095874217671654, 0.0)),
    (0.75, 1.0, (0.4, 0.0), (1.5856640673847473, 0.0)),
    (0.75, 1.0, (2.0, 0.0), (16.477360564726634, 0.0)),
    (0.75, 1.0, (6.0, 0.0), (72432.11719531404, 0.0)),
    (0.75, 1.0, (10.0, 0.0), (3030607625.2902217, 0.0)),
    (0.75, 1.0, (3.0, 4.0), (-4.898043046154711, 21.552029278752048)),
    (0.75, 1.0, (-6.0, 2.0), (0.04761213556221129, 0.018686165087201962)),
    (0.75, 1.0, (0.0, 9.0), (-0.003576292234432825, 0.030225871770173364)),
    (0.75, 1.5, (-10.0, 0.0), (0.08135054959452961, 0.0)),
    (0.75, 1.5, (-7.5, 0.0), (0.10816298275622468, 0.0)),
    (0.75, 1.5, (-3.0, 0.0), (0.2593769171783853, 0.0)),
    (0.75, 1.5, (-1.0, 0.0), (0.5838112189973016, 0.0)),
    (0.75, 1.5, (-0.2, 0.0), (0.970177384306354, 0.0)),
    (0.75, 1.5, (0.4, 0.0), (1.5784228945191787, 0.0)),
    (0.75, 1.5, (2.0, 0.0), (10.04121766928034, 0.0)),
    (0.75, 1.5, (6.0, 0.0), (21936.19186403388, 0.0)),
    (0.75, 1.5, (10.0, 0.0), (652924619.9039934, 0.0)),
    (0.75, 1.5, (3.0, 4.0), (2.8106056389708485, 7.090833340312867)),
    (0.75, 1.5, (-6.0, 2.0), (0.12185824232780094, 0.039831672855038344)),
    (0.75, 1.5, (0.0, 9.0), (-8.683506786435474e-05, 0.09095918320551812)),
    (0.75, 2.0, (-10.0, 0.0), (0.10448519294440892, 0.0)),
    (0.75, 2.0, (-7.5, 0.0), (0.1366102430660054, 0.0)),
    (0.75, 2.0, (-3.0, 0.0), (0.30009861325966475, 0.0)),
    (0.75, 2.0, (-1.0, 0.0), (0.5901958903094949, 0.0)),
    (0.75, 2.0, (-0.2, 0.0), (0.886782956032355, 0.0)),
    (0.75, 2.0, (0.4, 0.0), (1.3057819608287324, 0.0)),
    (0.75, 2.0, (2.0, 0.0), (5.90449563581827, 0.0)),
    (0.75, 2.0, (6.0, 0.0), (6643.293338899374, 0.0)),
    (0.75, 2.0, (10.0, 0.0), (140668345.01148227, 0.0)),
    (0.75, 2.0, (3.0, 4.0), (2.063069819033161, 1.560887512010049)),
    (0.75, 2.0, (-6.0, 2.0), (0.15373858261206558, 0.046091657584894356)),
    (0.75, 2.0, (0.0, 9.0), (0.006963453730246399, 0.12287642458795972)),
    (0.9, 0.5, (-10.0, 0.0), (-0.030347874573228822, 0.0)),
    (0.9, 0.5, (-7.5, 0.0), (-0.04213630358978307, 0.0)),
    (0.9, 0.5, (-3.0, 0.0), (-0.10025244677360001, 0.0)),
    (0.9, 0.5, (-1.0, 0.0), (-0.005017248314851947, 0.0)),
    (0.9, 0.5, (-0.2, 0.0), (0.3699836237050046, 0.0)),
    (0.9, 0.5, (0.4, 0.0), (1.1827827337306462, 0.0)),
    (0.9, 0.5, (2.0, 0.0), (14.252371471374127, 0.0)),
    (0.9, 0.5, (6.0, 0.0), (4548.261857745098, 0.0)),
    (0.9, 0.5, (10.0, 0.0), (1623461.4435816994, 0.0)),
    (0.9, 0.5, (3.0, 4.0), (47.240546566163985, -35.266612887097814)),
    (0.9, 0.5, (-6.0, 2.0), (-0.04804575203629433, -0.018812449215135547)),
    (0.9, 0.5, (0.0, 9.0), (0.4793851711123507, -0.21903883600888155)),
    (0.9, 1.0, (-10.0, 0.0), (0.0128206060511021, 0.0)),
    (0.9, 1.0, (-7.5, 0.0), (0.018662932471857276, 0.0)),
    (0.9, 1.0, (-3.0, 0.0), (0.08388835403377326, 0.0)),
    (0.9, 1.0, (-1.0, 0.0), (0.3760660214246419, 0.0)),
    (0.9, 1.0, (-0.2, 0.0), (0.8141040817948122, 0.0)),
    (0.9, 1.0, (0.4, 0.0), (1.528811565111638, 0.0)),
    (0.9, 1.0, (2.0, 0.0), (9.604927784571501, 0.0)),
    (0.9, 1.0, (6.0, 0.0), (1680.8616553505858, 0.0)),
    (0.9, 1.0, (10.0, 0.0), (451737.7745677374, 0.0)),
    (0.9, 1.0, (3.0, 4.0), (9.688506999748117, -22.039194620800252)),
    (0.9, 1.0, (-6.0, 2.0), (0.02039800402020591, 0.010509120692679867)),
    (0.9, 1.0, (0.0, 9.0), (0.04533059218262605, -0.1323381873988328)),
    (0.9, 1.5, (-10.0, 0.0), (0.06968328583501412, 0.0)),
    (0.9, 1.5, (-7.5, 0.0), (0.09414900068186569, 0.0)),
    (0.9, 1.5, (-3.0, 0.0), (0.2469590304382607, 0.0)),
    (0.9, 1.5, (-1.0, 0.0), (0.5959580252707279, 0.0)),
    (0.9, 1.5, (-0.2, 0.0), (0.9813001302471829, 0.0)),
    (0.9, 1.5, (0.4, 0.0), (1.5192816380011718, 0.0)),
    (0.9, 1.5, (2.0, 0.0), (6.261599209961715, 0.0)),
    (0.9, 1.5, (6.0, 0.0), (621.0906617033712, 0.0)),
    (0.9, 1.5, (10.0, 0.0), (125698.65669752912, 0.0)),
    (0.9, 1.5, (3.0, 4.0), (-1.0723171745361524, -9.702893137106031)),
    (0.9, 1.5, (-6.0, 2.0), (0.10597258541892708, 0.03769045462942482)),
    (0.9, 1.5, (0.0, 9.0), (-0.026279610643246402, 0.036415487248765414)),
    (0.9, 2.0, (-10.0, 0.0), (0.10264335131060806, 0.0)),
    (0.9, 2.0, (-7.5, 0.0), (0.13551967466682557, 0.0)),
    (0.9, 2.0, (-3.0, 0.0), (0.3095766951912586, 0.0)),
    (0.9, 2.0, (-1.0, 0.0), (0.6143156447729647, 0.0)),
    (0.9, 2.0, (-0.2, 0.0), (0.8985798959896545, 0.0)),
    (0.9, 2.0, (0.4, 0.0), (1.2575821046775244, 0.0)),
    (0.9, 2.0, (2.0, 0.0), (3.8970442595563375, 0.0)),
    (0.9, 2.0, (6.0, 0.0), (229.39379912904673, 0.0)),
    (0.9, 2.0, (10.0, 0.0), (34976.30890444088, 0.0)),
    (0.9, 2.0, (3.0, 4.0), (-2.4524271111603655, -3.1131484855851945)),
    (0.9, 2.0, (-6.0, 2.0), (0.15272263418792772, 0.048091024117122114)),
    (0.9, 2.0, (0.0, 9.0), (-0.010390067421664236, 0.11520993817581031)),
    (1.0, 0.5, (-10.0, 0.0), (-0.03427543110755518, 0.0)),
    (1.0, 0.5, (-7.5, 0.0), (-0.05032909140280462, 0.0)),
    (1.0, 0.5, (-3.0, 0.0), (-0.1474054417765825, 0.0)),
    (1.0, 0.5, (-1.0, 0.0), (-0.042968122293637445, 0.0)),
    (1.0, 0.5, (-0.2, 0.0), (0.36632830925736487, 0.0)),
    (1.0, 0.5, (0.4, 0.0), (1.1575710286207581, 0.0)),
    (1.0, 0.5, (2.0, 0.0), (10.538428671807383, 0.0)),
    (1.0, 0.5, (6.0, 0.0), (988.2331561713128, 0.0)),
    (1.0, 0.5, (10.0, 0.0), (69653.82549085579, 0.0)),
    (1.0, 0.5, (3.0, 4.0), (-11.022575156250989, -43.56284900408775)),
    (1.0, 0.5, (-6.0, 2.0), (-0.057066636585983745, -0.029244741933805645)),
    (1.0, 0.5, (0.0, 9.0), (-2.8022595635990433, -1.0886630659628047)),
    (1.0, 1.0, (-10.0, 0.0), (4.5399929762484854e-05, 0.0)),
    (1.0, 1.0, (-7.5, 0.0), (0.0005530843701478336, 0.0)),
    (1.0, 1.0, (-3.0, 0.0), (0.049787068367863944, 0.0)),
    (1.0, 1.0, (-1.0, 0.0), (0.36787944117144233, 0.0)),
    (1.0, 1.0, (-0.2, 0.0), (0.8187307530779818, 0.0)),
    (1.0, 1.0, (0.4, 0.0), (1.4918246976412703, 0.0)),
    (1.0, 1.0, (2.0, 0.0), (7.38905609893065, 0.0)),
    (1.0, 1.0, (6.0, 0.0), (403.4287934927351, 0.0)),
    (1.0, 1.0, (10.0, 0.0), (22026.465794806718, 0.0)),
    (1.0, 1.0, (3.0, 4.0), (-13.128783081462158, -15.200784463067954)),
    (1.0, 1.0, (-6.0, 2.0), (-0.0010315248769040485, 0.0022539229759812773)),
    (1.0, 1.0, (0.0, 9.0), (-0.9111302618846769, 0.4121184852417566)),
    (1.0, 1.5, (-10.0, 0.0), (0.059846501465531145, 0.0)),
    (1.0, 1.5, (-7.5, 0.0), (0.08193582332674146, 0.0)),
    (1.0, 1.5, (-3.0, 0.0), (0.23719834177477958, 0.0)),
    (1.0, 1.5, (-1.0, 0.0), (0.6071577058413937, 0.0)),
    (1.0, 1.5, (-0.2, 0.0), (0.9893063714519569, 0.0)),
    (1.0, 1.5, (0.4, 0.0), (1.4834536126825044, 0.0)),
    (1.0, 1.5, (2.0, 0.0), (4.987119544129813, 0.0)),
    (1.0, 1.5, (6.0, 0.0), (164.61149443129418, 0.0)),
    (1.0, 1.5, (10.0, 0.0), (6965.326130127224, 0.0)),
    (1.0, 1.5, (3.0, 4.0), (-8.36046760942989, -3.3736595221227312)),
    (1.0, 1.5, (-6.0, 2.0), (0.09172619592337072, 0.03544952229675785)),
    (1.0, 1.5, (0.0, 9.0), (-0.12096256288475608, 0.37404990523853326)),
    (1.0, 2.0, (-10.0, 0.0), (0.09999546000702375, 0.0)),
    (1.0, 2.0, (-7.5, 0.0), (0.13325958875064695, 0.0)),
    (1.0, 2.0, (-3.0, 0.0), (0.3167376438773787, 0.0)),
    (1.0, 2.0, (-1.0, 0.0), (0.6321205588285577, 0.0)),
    (1.0, 2.0, (-0.2, 0.0), (0.9063462346100907, 0.0)),
    (1.0, 2.0, (0.4, 0.0), (1.2295617441031759, 0.0)),
    (1.0, 2.0, (2.0, 0.0), (3.194528049465325, 0.0)),
    (1.0, 2.0, (6.0, 0.0), (67.07146558212251, 0.0)),
    (1.0, 2.0, (10.0, 0.0), (2202.5465794806714, 0.0)),
    (1.0, 2.0, (3.0, 4.0), (-4.127579483866332, 0.4365111574657907)),
    (1.0, 2.0, (-6.0, 2.0), (0.15026742488033468, 0.04971348779744801)),
    (1.0, 2.0, (0.0, 9.0), (0.04579094280463962, 0.2123478068760752)),
];

#[rustfmt::skip]
const NEGATIVE_AXIS: &[(f64, f64, f64, f64)] = &[
    (0.25, 0.25, -10.0, 0.0017784974573088644),
    (0.25, 0.25, -30.0, 0.00021648735946473948),
    (0.25, 0.25, -60.0, 5.538002704649815e-05),
    (0.25, 0.25, -100.0, 2.0121197052333858e-05),
    (0.25, 1.0, -10.0, 0.07623703523896741),
    (0.25, 1.0, -30.0, 0.02658496136484025),
    (0.25, 1.0, -60.0, 0.013445372990724687),
    (0.25, 1.0, -100.0, 0.008104346228094065),
    (0.5, 0.5, -10.0, 0.0027796561095304283),
    (0.5, 0.5, -30.0, 0.00031291770525374203),
    (0.5, 0.5, -60.0, 7.832703717297162e-05),
    (0.5, 0.5, -100.0, 2.8205248812996592e-05),
    (0.5, 1.0, -10.0, 0.05614099274382259),
    (0.5, 1.0, -30.0, 0.01879588886141675),
    (0.5, 1.0, -60.0, 0.009401854275176388),
    (0.5, 1.0, -100.0, 0.005641613782989433),
    (0.75, 0.75, -10.0, 0.00254344315296682),
    (0.75, 0.75, -30.0, 0.00024622074958261615),
    (0.75, 0.75, -60.0, 5.9464775307090635e-05),
    (0.75, 0.75, -100.0, 2.1115050840055734e-05),
    (0.75, 1.0, -10.0, 0.030643250976059636),
    (0.75, 1.0, -30.0, 0.009516692693117128),
    (0.75, 1.0, -60.0, 0.0046764666421501245),
    (0.75, 1.0, -100.0, 0.0027866210194390935),
    (0.9, 0.9, -10.0, 0.0014346523622941285),
    (0.9, 0.9, -30.0, 0.00011825044794307207),
    (0.9, 0.9, -60.0, 2.7819057608177362e-05),
    (0.9, 0.9, -100.0, 9.785063588909692e-06),
    (0.9, 1.0, -10.0, 0.0128206060511021),
    (0.9, 1.0, -30.0, 0.003713707698459852),
    (0.9, 1.0, -60.0, 0.0018022340312846147),
    (0.9, 1.0, -100.0, 0.001068972418287089),
];

#[test]
fn matches_reference_within_ten() {
    let mut worst = 0.0f64;
    for &(a, b, (zr, zi), (vr, vi)) in SERIES_TABLE {
        let z = Complex64::new(zr, zi);
        let want = Complex64::new(vr, vi);
        let got = ml_scalar(MLParams::new(a, b).unwrap(), z).unwrap();
        let rel = (got - want).norm() / want.norm();
        worst = worst.max(rel);
        assert!(
            rel <= 1e-12,
            "E_{a},{b}({z}) = {got}, want {want} (rel {rel:e})"
        );
    }
    eprintln!("worst relative error {worst:e}");
}

#[test]
fn matches_reference_far_on_negative_axis() {
    for &(a, b, x, want) in NEGATIVE_AXIS {
        let got = ml_real(MLParams::new(a, b).unwrap(), x).unwrap();
        let rel = ((got - want) / want).abs();
        assert!(
            rel <= 1e-8,
            "E_{a},{b}({x}) = {got}, want {want} (rel {rel:e})"
        );
    }
}
