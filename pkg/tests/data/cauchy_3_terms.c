/* quantile of stable(alpha=1.0), 4 odd orders, v = 2u - 1, w = v*v */
double cauchy_w(double u)
{
    double v = 2.0 * u - 1.0;
    double w = v * v;
    return v*(1.5707963267948966 + w*(1.2919281950124926 + w*(1.2750820199386728 + w*1.2734371248066831)));
}
